use super::FiniteStructure;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// An age together with its expansion family.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassSpec {
    /// All finite tournaments; expansions are linear orders.
    Tournaments,
    /// Finite linear tournaments; the unique expansion is the induced order.
    QAge,
    /// Finite digraphs without arcs; expansions are linear orders.
    EdgelessAge,
    S2Age,
    S3Age,
    PosetAge,
    P3Age,
    DnAge(usize),
    DomegaAge,
    HatTAge,
    HatQAge,
    SemiGenericAge,
    /// Semi-generic digraphs carrying `R`; expansions are the orders.
    SemiGenericRAge,
    GnAge(usize),
    FTAge(Vec<FiniteStructure>),
    Composition(Box<ClassSpec>, Box<ClassSpec>),
    TreeLeafAge,
    OrderedTreeLeafAge,
}

impl ClassSpec {
    pub fn check(&self) -> Result<()> {
        match self {
            ClassSpec::FTAge(list) => {
                for t in list {
                    if t.len() < 3 {
                        return Err(Error::Config(
                            "forbidden tournaments need at least three vertices".into(),
                        ));
                    }
                    if !(0..t.len()).all(|x| (x + 1..t.len()).all(|y| !t.perp(x, y))) {
                        return Err(Error::Config("forbidden structure is not a tournament".into()));
                    }
                }
                Ok(())
            }
            ClassSpec::GnAge(n) if *n < 2 => Err(Error::Config("G_n needs n >= 2".into())),
            ClassSpec::DnAge(0) => Err(Error::Config("D_n needs n >= 1".into())),
            ClassSpec::Composition(k, l) => {
                k.check()?;
                l.check()
            }
            _ => Ok(()),
        }
    }

    /// Short command-line tag.
    pub fn tag(&self) -> String {
        match self {
            ClassSpec::Tournaments => "tournaments".into(),
            ClassSpec::QAge => "q".into(),
            ClassSpec::EdgelessAge => "edgeless".into(),
            ClassSpec::S2Age => "s2".into(),
            ClassSpec::S3Age => "s3".into(),
            ClassSpec::PosetAge => "poset".into(),
            ClassSpec::P3Age => "p3".into(),
            ClassSpec::DnAge(n) => format!("d{n}"),
            ClassSpec::DomegaAge => "d-omega".into(),
            ClassSpec::HatTAge => "hat-t".into(),
            ClassSpec::HatQAge => "hat-q".into(),
            ClassSpec::SemiGenericAge => "semi-generic".into(),
            ClassSpec::SemiGenericRAge => "semi-generic-r".into(),
            ClassSpec::GnAge(n) => format!("g{n}"),
            ClassSpec::FTAge(list) => {
                if list.len() == 1 && super::is_isomorphic(&list[0], &FiniteStructure::cycle3()) {
                    "ft-c3".into()
                } else {
                    format!("ft[{}]", list.len())
                }
            }
            ClassSpec::Composition(k, l) => format!("{}[{}]", k.tag(), l.tag()),
            ClassSpec::TreeLeafAge => "tree-leaf".into(),
            ClassSpec::OrderedTreeLeafAge => "ordered-tree-leaf".into(),
        }
    }

    /// Parses the tags produced by [`ClassSpec::tag`] (plus `dn:3`, `gn:2`).
    pub fn parse(tag: &str) -> Result<ClassSpec> {
        let t = tag.trim().to_ascii_lowercase();
        if let Some((k, l)) = split_composition(&t) {
            return Ok(ClassSpec::Composition(
                Box::new(ClassSpec::parse(k)?),
                Box::new(ClassSpec::parse(l)?),
            ));
        }
        let spec = match t.as_str() {
            "tournaments" | "t-omega" => ClassSpec::Tournaments,
            "q" => ClassSpec::QAge,
            "edgeless" | "i-omega" => ClassSpec::EdgelessAge,
            "s2" => ClassSpec::S2Age,
            "s3" => ClassSpec::S3Age,
            "poset" | "p" => ClassSpec::PosetAge,
            "p3" => ClassSpec::P3Age,
            "d-omega" | "domega" => ClassSpec::DomegaAge,
            "hat-t" | "hatt" => ClassSpec::HatTAge,
            "hat-q" | "hatq" => ClassSpec::HatQAge,
            "semi-generic" | "s" => ClassSpec::SemiGenericAge,
            "semi-generic-r" | "s-r" => ClassSpec::SemiGenericRAge,
            "ft-c3" => ClassSpec::FTAge(vec![FiniteStructure::cycle3()]),
            "tree-leaf" => ClassSpec::TreeLeafAge,
            "ordered-tree-leaf" => ClassSpec::OrderedTreeLeafAge,
            other => {
                let num = |p: &str| -> Option<usize> {
                    other.strip_prefix(p).map(|r| r.trim_start_matches(':')).and_then(|r| r.parse().ok())
                };
                if let Some(n) = num("dn").or_else(|| num("d")) {
                    ClassSpec::DnAge(n)
                } else if let Some(n) = num("gn").or_else(|| num("g")) {
                    ClassSpec::GnAge(n)
                } else {
                    return Err(Error::Config(format!("unknown class tag `{tag}`")));
                }
            }
        };
        spec.check()?;
        Ok(spec)
    }
}

fn split_composition(t: &str) -> Option<(&str, &str)> {
    let open = t.find('[')?;
    if !t.ends_with(']') || t.starts_with("ft[") {
        return None;
    }
    Some((&t[..open], &t[open + 1..t.len() - 1]))
}

impl fmt::Display for ClassSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_round_trip() {
        for s in [
            ClassSpec::Tournaments,
            ClassSpec::S2Age,
            ClassSpec::DnAge(3),
            ClassSpec::GnAge(2),
            ClassSpec::DomegaAge,
            ClassSpec::FTAge(vec![FiniteStructure::cycle3()]),
            ClassSpec::Composition(Box::new(ClassSpec::Tournaments), Box::new(ClassSpec::EdgelessAge)),
        ] {
            assert_eq!(ClassSpec::parse(&s.tag()).unwrap(), s);
        }
    }

    #[test]
    fn parameter_checks() {
        assert!(ClassSpec::GnAge(1).check().is_err());
        assert!(ClassSpec::FTAge(vec![FiniteStructure::linear_tournament(2)]).check().is_err());
    }
}
