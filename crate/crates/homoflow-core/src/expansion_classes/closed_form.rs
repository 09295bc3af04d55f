use crate::error::{Error, Result};
use crate::structures::{first_embedding, ClassSpec, FiniteStructure};

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

fn class_sizes(s: &FiniteStructure) -> Result<Vec<usize>> {
    Ok(s.perp_partition()?.iter().map(Vec::len).collect())
}

fn fact_product(sizes: &[usize]) -> u128 {
    sizes.iter().map(|&s| factorial(s)).product()
}

fn choose2(k: usize) -> u32 {
    (k * k.saturating_sub(1) / 2) as u32
}

/// Closed form for `#(A)`, the number of expansions of `a`.
pub fn closed_form_total(spec: &ClassSpec, a: &FiniteStructure) -> Result<u128> {
    let n = a.len();
    Ok(match spec {
        ClassSpec::Tournaments | ClassSpec::EdgelessAge | ClassSpec::GnAge(_) | ClassSpec::FTAge(_) => {
            factorial(n)
        }
        ClassSpec::QAge => 1,
        ClassSpec::DomegaAge => {
            let s = class_sizes(a)?;
            factorial(s.len()) * fact_product(&s)
        }
        ClassSpec::DnAge(m) => {
            let s = class_sizes(a)?;
            if s.len() > *m {
                return Ok(0);
            }
            factorial(*m) / factorial(m - s.len()) * fact_product(&s)
        }
        ClassSpec::HatTAge => {
            let k = class_sizes(a)?.len();
            factorial(k) << k
        }
        ClassSpec::HatQAge => {
            let s = class_sizes(a)?;
            if s.iter().all(|&x| x == 2) {
                2 * s.len() as u128
            } else {
                return Err(Error::Unsupported("closed form needs full columns".into()));
            }
        }
        ClassSpec::SemiGenericAge => {
            let s = class_sizes(a)?;
            (factorial(s.len()) << choose2(s.len())) * fact_product(&s)
        }
        ClassSpec::SemiGenericRAge => fact_product(&class_sizes(a)?),
        other => return Err(Error::Unsupported(format!("no closed form for `{}`", other.tag()))),
    })
}

/// Closed form for `#(A*, B)`, the number of expansions of `b` extending a
/// fixed expansion of `a` along an embedding; independent of the choice of
/// expansion and embedding.
pub fn closed_form_count(spec: &ClassSpec, a: &FiniteStructure, b: &FiniteStructure) -> Result<u128> {
    if first_embedding(a, b).is_none() {
        return Err(Error::Embedding("the first structure does not embed in the second".into()));
    }
    let (na, nb) = (a.len(), b.len());
    Ok(match spec {
        ClassSpec::Tournaments | ClassSpec::EdgelessAge | ClassSpec::GnAge(_) | ClassSpec::FTAge(_) => {
            factorial(nb) / factorial(na)
        }
        ClassSpec::QAge => 1,
        ClassSpec::DomegaAge => {
            let (sa, sb) = (class_sizes(a)?, class_sizes(b)?);
            factorial(sb.len()) / factorial(sa.len()) * fact_product(&sb) / fact_product(&sa)
        }
        ClassSpec::DnAge(m) => {
            let (sa, sb) = (class_sizes(a)?, class_sizes(b)?);
            if sb.len() > *m {
                return Ok(0);
            }
            factorial(m - sa.len()) / factorial(m - sb.len()) * fact_product(&sb) / fact_product(&sa)
        }
        ClassSpec::HatTAge => {
            let (ka, kb) = (class_sizes(a)?.len(), class_sizes(b)?.len());
            (factorial(kb) / factorial(ka)) << (kb - ka)
        }
        ClassSpec::SemiGenericAge => {
            let (sa, sb) = (class_sizes(a)?, class_sizes(b)?);
            let top = (factorial(sb.len()) << choose2(sb.len())) * fact_product(&sb);
            let bottom = (factorial(sa.len()) << choose2(sa.len())) * fact_product(&sa);
            top / bottom
        }
        ClassSpec::SemiGenericRAge => fact_product(&class_sizes(b)?) / fact_product(&class_sizes(a)?),
        other => return Err(Error::Unsupported(format!("no closed form for `{}`", other.tag()))),
    })
}
