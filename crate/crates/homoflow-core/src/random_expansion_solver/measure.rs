use crate::error::{Error, Result};
use crate::expansion_classes::{enumerate_expansions, Expansion};
use crate::structures::{CanonicalForm, ClassSpec, FiniteStructure};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;

/// Exact weights on expansions, keyed by isomorphism type so isomorphic
/// expansions share one weight.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RandomExpansionMeasure {
    entries: BTreeMap<CanonicalForm, (Expansion, BigRational)>,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    expansion: Expansion,
    weight: String,
}

impl RandomExpansionMeasure {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets the weight of the isomorphism type of `e`.
    pub fn insert(&mut self, e: Expansion, w: BigRational) {
        self.entries.insert(e.canonical_form(), (e, w));
    }

    pub fn weight(&self, e: &Expansion) -> Result<BigRational> {
        self.entries
            .get(&e.canonical_form())
            .map(|(_, w)| w.clone())
            .ok_or_else(|| Error::IncompleteMeasure(e.to_json().to_string()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Expansion, &BigRational)> {
        self.entries.values().map(|(e, w)| (e, w))
    }

    /// `1/#(A)` on every expansion of every listed structure.
    pub fn uniform(spec: &ClassSpec, structures: &[FiniteStructure]) -> Result<Self> {
        let mut m = Self::new();
        for s in structures {
            let list = enumerate_expansions(spec, s)?;
            let w = BigRational::new(1.into(), (list.len() as u64).into());
            for e in list {
                m.insert(e, w.clone());
            }
        }
        Ok(m)
    }

    /// Weights on the expansions of `a` are positive and sum to one.
    pub fn is_probability_on(&self, spec: &ClassSpec, a: &FiniteStructure) -> Result<bool> {
        let mut total = BigRational::zero();
        for e in enumerate_expansions(spec, a)? {
            let w = self.weight(&e)?;
            if !w.is_positive() {
                return Ok(false);
            }
            total += w;
        }
        Ok(total.is_one())
    }
}

impl Serialize for RandomExpansionMeasure {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let list: Vec<Entry> =
            self.entries().map(|(e, w)| Entry { expansion: e.clone(), weight: w.to_string() }).collect();
        list.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RandomExpansionMeasure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let list = Vec::<Entry>::deserialize(d)?;
        let mut m = RandomExpansionMeasure::new();
        for en in list {
            let w: BigRational = en.weight.parse().map_err(|_| D::Error::custom("bad rational weight"))?;
            m.insert(en.expansion, w);
        }
        Ok(m)
    }
}
