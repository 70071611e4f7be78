use super::{make_cyclic, make_dihedral, make_product, FiniteGroup, GroupKind};
use crate::error::{Error, Result};

impl GroupKind {
    /// Parses `"C6"`, `"C2xC2xC2"`, `"D3"` (case-insensitive, `x` separates factors).
    pub fn parse(spec: &str) -> Result<GroupKind> {
        let bad = || Error::GroupSpec(spec.to_string());
        let lower = spec.trim().to_ascii_lowercase();
        if lower.is_empty() {
            return Err(bad());
        }
        let mut factors = Vec::new();
        for part in lower.split('x') {
            let part = part.trim();
            let (tag, digits) = part.split_at(part.find(|c: char| c.is_ascii_digit()).ok_or_else(bad)?);
            let n: usize = digits.parse().map_err(|_| bad())?;
            factors.push(match tag {
                "c" => GroupKind::Cyclic(n),
                "d" => GroupKind::Dihedral(n),
                _ => return Err(bad()),
            });
        }
        Ok(if factors.len() == 1 { factors.pop().unwrap() } else { GroupKind::Product(factors) })
    }
}

/// Parses a group spec string and builds the group.
pub fn parse_group_spec(spec: &str) -> Result<FiniteGroup> {
    match GroupKind::parse(spec)? {
        GroupKind::Cyclic(d) => make_cyclic(d),
        GroupKind::Dihedral(n) => make_dihedral(n),
        GroupKind::Product(fs) => {
            let mut acc: Option<FiniteGroup> = None;
            for f in fs {
                let g = f.build()?;
                acc = Some(match acc {
                    None => g,
                    Some(a) => make_product(&a, &g)?,
                });
            }
            Ok(acc.expect("nonempty product"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_specs() {
        assert_eq!(GroupKind::parse("C6").unwrap(), GroupKind::Cyclic(6));
        assert_eq!(GroupKind::parse("d3").unwrap(), GroupKind::Dihedral(3));
        assert_eq!(
            GroupKind::parse("C2xc2XC2").unwrap(),
            GroupKind::Product(vec![GroupKind::Cyclic(2); 3])
        );
        assert_eq!(parse_group_spec("c2xc3").unwrap().order(), 6);
        for bad in ["", "C", "E4", "C2x", "Cx2", "C-1", "6"] {
            assert!(matches!(GroupKind::parse(bad), Err(Error::GroupSpec(_))), "{bad}");
        }
    }

    #[test]
    fn rejects_invalid_orders() {
        assert!(matches!(parse_group_spec("C0"), Err(Error::InvalidOrder(_))));
        assert!(matches!(parse_group_spec("D2"), Err(Error::InvalidOrder(_))));
        assert!(matches!(parse_group_spec("C65"), Err(Error::OrderTooLarge { order: 65, .. })));
    }
}
