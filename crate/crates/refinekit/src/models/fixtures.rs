//! Generators for the standard finite algebras used as fixtures. The corpus
//! lists the same tables literally; tests check both agree.

use std::collections::BTreeMap;

use super::{diagonal, rows, FiniteKStructure};
use crate::sigterm::{name, Name, Signature};

pub const BOOL: &str = "bool";

pub fn lattice_sig() -> Signature {
    Signature::new().with_sort(BOOL).with_op("/\\", &[BOOL, BOOL], BOOL).with_op("\\/", &[BOOL, BOOL], BOOL)
}

/// Lattice operations plus `tt`, `ff` and `!`.
pub fn bool_sig() -> Signature {
    lattice_sig().with_op("tt", &[], BOOL).with_op("ff", &[], BOOL).with_op("!", &[BOOL], BOOL)
}

/// Boolean signature plus the residual `->`.
pub fn heyting_sig() -> Signature {
    bool_sig().with_op("->", &[BOOL, BOOL], BOOL)
}

/// Build a one-sorted structure from operation closures.
fn tabulate(
    sname: &str,
    sig: Signature,
    n: usize,
    names: Vec<String>,
    op: impl Fn(&str, &[usize]) -> usize,
) -> FiniteKStructure {
    let carriers: BTreeMap<Name, usize> = [(name(BOOL), n)].into_iter().collect();
    let mut tables = BTreeMap::new();
    for (o, prof) in &sig.ops {
        let r = rows(&carriers, &prof.args);
        let t = (0..r)
            .map(|i| {
                let mut args = vec![0; prof.args.len()];
                let mut rest = i;
                for a in args.iter_mut().rev() {
                    *a = rest % n;
                    rest /= n;
                }
                op(o, &args)
            })
            .collect();
        tables.insert(o.clone(), t);
    }
    FiniteKStructure {
        name: name(sname),
        signature: sig,
        dim: 2,
        carriers: carriers.clone(),
        tables,
        filters: [(name(BOOL), diagonal(n, 2))].into_iter().collect(),
        element_names: [(name(BOOL), names)].into_iter().collect(),
        labels: Vec::new(),
    }
}

/// The n-element chain `0 < … < n-1` as a Heyting algebra.
pub fn heyting_chain(n: usize) -> FiniteKStructure {
    assert!(n >= 2, "chains need a bottom and a top");
    let top = n - 1;
    let names = match n {
        2 => vec!["0".into(), "1".into()],
        3 => vec!["0".into(), "a".into(), "1".into()],
        4 => vec!["0".into(), "a".into(), "b".into(), "1".into()],
        _ => (0..n).map(|i| i.to_string()).collect(),
    };
    let imp = move |x: usize, y: usize| if x <= y { top } else { y };
    tabulate(&format!("chain-{n}"), heyting_sig(), n, names, move |o, a| match o {
        "/\\" => a[0].min(a[1]),
        "\\/" => a[0].max(a[1]),
        "->" => imp(a[0], a[1]),
        "!" => imp(a[0], 0),
        "tt" => top,
        "ff" => 0,
        _ => unreachable!("heyting signature"),
    })
}

/// The four-element Boolean algebra `{0, a, b, 1}` (bit vectors of length 2).
pub fn boolean4() -> FiniteKStructure {
    let names = vec!["0".into(), "a".into(), "b".into(), "1".into()];
    tabulate("boolean-4", heyting_sig(), 4, names, |o, a| match o {
        "/\\" => a[0] & a[1],
        "\\/" => a[0] | a[1],
        "->" => (!a[0] & 3) | a[1],
        "!" => !a[0] & 3,
        "tt" => 3,
        "ff" => 0,
        _ => unreachable!("heyting signature"),
    })
}

/// The two-element Boolean algebra over the Boolean signature.
pub fn boolean2() -> FiniteKStructure {
    tabulate("boolean-2", bool_sig(), 2, vec!["0".into(), "1".into()], |o, a| match o {
        "/\\" => a[0] & a[1],
        "\\/" => a[0] | a[1],
        "!" => 1 - a[0],
        "tt" => 1,
        "ff" => 0,
        _ => unreachable!("boolean signature"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain3_negation() {
        let m = heyting_chain(3);
        // !a = a -> 0 = 0 and !0 = 1
        assert_eq!(m.apply("!", &[1]), 0);
        assert_eq!(m.apply("!", &[0]), 2);
        assert_eq!(m.apply("!", &[2]), 0);
    }

    #[test]
    fn boolean4_complements() {
        let m = boolean4();
        assert_eq!(m.apply("!", &[1]), 2);
        assert_eq!(m.apply("\\/", &[1, 2]), 3);
        assert!(m.validate().is_ok());
    }

    #[test]
    fn residuation_law() {
        // x /\ y <= z iff x <= y -> z, checked on every chain fixture
        for n in 2..=4 {
            let m = heyting_chain(n);
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        assert_eq!(m.apply("/\\", &[x, y]) <= z, x <= m.apply("->", &[y, z]));
                    }
                }
            }
        }
    }
}
