use std::collections::BTreeSet;

use serde::Serialize;

use super::Formula;

/// Membership of a formula in the continuous / cocontinuous fragments for a
/// set of names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Fragment {
    InConX,
    InCoconX,
    InBoth,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FragmentReport {
    pub fragment: Fragment,
    /// Whether the formula belongs to the continuous μ-calculus at all.
    pub mucml: bool,
}

/// Decide membership in `Con_X` and `Cocon_X` by recursion on their grammars,
/// plus membership in the continuous μ-calculus itself.
pub fn classify_fragment(phi: &Formula, vars: &BTreeSet<String>) -> FragmentReport {
    let con = in_con(phi, vars);
    let cocon = in_cocon(phi, vars);
    let fragment = match (con, cocon) {
        (true, true) => Fragment::InBoth,
        (true, false) => Fragment::InConX,
        (false, true) => Fragment::InCoconX,
        (false, false) => Fragment::Neither,
    };
    FragmentReport {
        fragment,
        mucml: is_mucml(phi),
    }
}

/// Every `mu`-body is continuous and every `nu`-body cocontinuous in its
/// own variable.
pub fn is_mucml(phi: &Formula) -> bool {
    match phi {
        Formula::Atom(_) | Formula::NegAtom(_) | Formula::Top | Formula::Bottom => true,
        Formula::Or(a, b) | Formula::And(a, b) => is_mucml(a) && is_mucml(b),
        Formula::Diamond(a) | Formula::Box(a) => is_mucml(a),
        Formula::Mu(x, body) => in_con(body, &BTreeSet::from([x.clone()])),
        Formula::Nu(x, body) => in_cocon(body, &BTreeSet::from([x.clone()])),
    }
}

fn free_of(phi: &Formula, vars: &BTreeSet<String>) -> bool {
    vars.iter().all(|x| !phi.occurs_free(x))
}

pub(crate) fn in_con(phi: &Formula, vars: &BTreeSet<String>) -> bool {
    in_fragment(phi, vars, true)
}

pub(crate) fn in_cocon(phi: &Formula, vars: &BTreeSet<String>) -> bool {
    in_fragment(phi, vars, false)
}

fn in_fragment(phi: &Formula, vars: &BTreeSet<String>, continuous: bool) -> bool {
    if let Formula::Atom(x) = phi {
        if vars.contains(x) {
            return true;
        }
    }
    if is_mucml(phi) && free_of(phi, vars) {
        return true;
    }
    match (phi, continuous) {
        (Formula::Or(a, b) | Formula::And(a, b), _) => {
            in_fragment(a, vars, continuous) && in_fragment(b, vars, continuous)
        }
        (Formula::Diamond(a), true) | (Formula::Box(a), false) => in_fragment(a, vars, continuous),
        (Formula::Mu(y, body), true) | (Formula::Nu(y, body), false) => {
            let mut extended = vars.clone();
            extended.insert(y.clone());
            in_fragment(body, &extended, continuous)
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn classify(s: &str, vars: &[&str]) -> FragmentReport {
        let vars = vars.iter().map(|v| v.to_string()).collect();
        classify_fragment(&parse_formula(s).unwrap(), &vars)
    }

    #[test]
    fn diamond_is_continuous() {
        let r = classify("<>x", &["x"]);
        assert_eq!(r.fragment, Fragment::InConX);
        assert!(r.mucml);
    }

    #[test]
    fn box_is_only_cocontinuous() {
        let r = classify("[]x", &["x"]);
        assert_eq!(r.fragment, Fragment::InCoconX);
    }

    #[test]
    fn free_formulas_are_in_both() {
        assert_eq!(classify("[]p & <>q", &["x"]).fragment, Fragment::InBoth);
        assert_eq!(classify("x", &["x"]).fragment, Fragment::InBoth);
    }

    #[test]
    fn negated_variable_is_neither() {
        assert_eq!(classify("!x", &["x"]).fragment, Fragment::Neither);
    }

    #[test]
    fn mu_over_box_is_outside_the_fragment() {
        assert!(!classify("mu x. []x", &[]).mucml);
        assert!(classify("nu x. []x", &[]).mucml);
        assert!(classify("mu x. p | <>x", &[]).mucml);
        assert!(!classify("nu x. <>x", &[]).mucml);
    }

    #[test]
    fn nested_binders() {
        // nu nested in mu only when it does not mention the mu-variable
        assert!(classify("mu x. <>x | nu y. []y", &[]).mucml);
        assert!(!classify("mu x. nu y. <>x & []y", &[]).mucml);
        assert!(classify("mu x. mu y. <>x | <>y", &[]).mucml);
        assert_eq!(classify("mu y. x | <>y", &["x"]).fragment, Fragment::InConX);
    }
}
