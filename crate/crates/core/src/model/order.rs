use std::cmp::Ordering;

use serde::Serialize;

use super::schema::Instance;

/// Outcome of comparing two instances by their distance to a base instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DeltaOrder {
    Less,
    Equal,
    Greater,
    Incomparable,
}

impl DeltaOrder {
    pub fn as_partial(self) -> Option<Ordering> {
        match self {
            DeltaOrder::Less => Some(Ordering::Less),
            DeltaOrder::Equal => Some(Ordering::Equal),
            DeltaOrder::Greater => Some(Ordering::Greater),
            DeltaOrder::Incomparable => None,
        }
    }
}

/// `(a \ b) ∪ (b \ a)`.
pub fn symmetric_difference(a: &Instance, b: &Instance) -> Instance {
    a.as_set().symmetric_difference(b.as_set()).cloned().collect()
}

/// Compare `Δ(base, a)` with `Δ(base, b)` under set inclusion.
pub fn closer_than(base: &Instance, a: &Instance, b: &Instance) -> DeltaOrder {
    let da = symmetric_difference(base, a);
    let db = symmetric_difference(base, b);
    match (da.is_subset(&db), db.is_subset(&da)) {
        (true, true) => DeltaOrder::Equal,
        (true, false) => DeltaOrder::Less,
        (false, true) => DeltaOrder::Greater,
        (false, false) => DeltaOrder::Incomparable,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fact;

    fn inst(facts: &[crate::model::Fact]) -> Instance {
        facts.iter().cloned().collect()
    }

    #[test]
    fn set_algebra() {
        let a = inst(&[fact!("R", 1, 2)]);
        assert!(symmetric_difference(&a, &a).is_empty());
        let a = inst(&[fact!("R", 1, 2), fact!("P", 1)]);
        let b = inst(&[fact!("P", 1), fact!("P", 2)]);
        assert_eq!(symmetric_difference(&a, &b), inst(&[fact!("R", 1, 2), fact!("P", 2)]));
    }

    #[test]
    fn cascade_example_deltas() {
        let i = inst(&[fact!("R", 1, 2), fact!("R", 2, 3), fact!("P", 1)]);
        let i1 = i.union(&inst(&[fact!("P", 2), fact!("P", 3)]));
        assert_eq!(symmetric_difference(&i, &i1), inst(&[fact!("P", 2), fact!("P", 3)]));
        let mut i3 = i.clone();
        i3.remove(&fact!("P", 1));
        assert_eq!(closer_than(&i, &i3, &i1), DeltaOrder::Incomparable);
        assert_eq!(closer_than(&i, &i, &i1), DeltaOrder::Less);
        assert_eq!(closer_than(&i, &i1, &i), DeltaOrder::Greater);
        assert_eq!(closer_than(&i, &i1, &i1), DeltaOrder::Equal);
    }
}
