use serde::{Deserialize, Serialize};

use super::{Domain, Hypothesis, HypothesisClass};
use crate::error::{invalid, Result};

/// `{"domain_size": N, "members": [{"name": "...", "bits": "0101"}]}`;
/// the first bit character is point 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassFile {
    pub domain_size: usize,
    pub members: Vec<MemberRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub bits: String,
}

impl ClassFile {
    pub fn into_class(self) -> Result<HypothesisClass> {
        let domain = Domain::new(self.domain_size)?;
        let members = self
            .members
            .into_iter()
            .enumerate()
            .map(|(i, rec)| {
                let h = Hypothesis::parse_bits(&rec.bits)?;
                if h.len() != domain.size() {
                    return Err(invalid(format!(
                        "members[{i}].bits has length {}, expected domain_size = {}",
                        h.len(),
                        domain.size()
                    )));
                }
                Ok(match rec.name {
                    Some(n) => h.with_name(n),
                    None => h,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        HypothesisClass::new(domain, members)
    }
}

impl From<&HypothesisClass> for ClassFile {
    fn from(class: &HypothesisClass) -> Self {
        Self {
            domain_size: class.domain_size(),
            members: class
                .members()
                .iter()
                .map(|h| MemberRecord {
                    name: h.name().map(str::to_string),
                    bits: h.bit_string(),
                })
                .collect(),
        }
    }
}

impl HypothesisClass {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<ClassFile>(s)?.into_class()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ClassFile::from(self))?)
    }
}
