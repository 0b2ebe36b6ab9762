use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebra::MatrixGroup;
use crate::error::{Error, Result};

use super::{
    AffineIsotropy, AffineSpace, AffineTranslation, CartanSchouten, CartanSchoutenConnection, CartanVariant, Connection,
    GrassmannConnection, HomogeneousSpace, Isospectral, LieGroupSpace, MaurerCartan, Side, Spd, SpdConnection, Stiefel,
    StiefelConnection,
};

/// A resolved space together with its catalog connection, if it has one.
#[derive(Clone, Debug)]
pub struct SpaceEntry {
    pub space: Arc<dyn HomogeneousSpace>,
    pub connection: Option<Arc<dyn Connection>>,
}

impl SpaceEntry {
    fn with<S, C>(space: S, conn: impl FnOnce(S) -> C) -> Self
    where
        S: HomogeneousSpace + Clone + 'static,
        C: Connection + 'static,
    {
        let c: Arc<dyn Connection> = Arc::new(conn(space.clone()));
        SpaceEntry {
            space: Arc::new(space),
            connection: Some(c),
        }
    }

    pub fn connection(&self) -> Result<Arc<dyn Connection>> {
        self.connection.clone().ok_or_else(|| {
            Error::Unsupported(format!(
                "{} has no closed-form connection; drive it with a Lax-type choice",
                self.space.name()
            ))
        })
    }
}

/// Builds one family of spaces from the text after `family:`.
pub trait SpaceFactory: Send + Sync {
    fn usage(&self) -> &'static str;
    fn build(&self, args: &str) -> Result<SpaceEntry>;
}

struct Family {
    usage: &'static str,
    build: fn(&str) -> Result<SpaceEntry>,
}

impl SpaceFactory for Family {
    fn usage(&self) -> &'static str {
        self.usage
    }

    fn build(&self, args: &str) -> Result<SpaceEntry> {
        (self.build)(args)
    }
}

pub const SPACE_EXAMPLES: &[&str] = &[
    "affine:3",
    "affine_gl:3",
    "sphere:3",
    "stiefel:5,2",
    "grassmann:4,2",
    "isospectral:2*1,1*2,0*1",
    "toda:4",
    "spd:3",
    "so:3",
    "gl:3:right",
    "cartan_schouten:so3:mean",
];

fn usizes(args: &str, count: usize, what: &'static str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = args.split(',').map(str::trim).collect();
    let bad = || Error::invalid(what, format!("expected {count} comma-separated positive integers, got '{args}'"));
    if parts.len() != count {
        return Err(bad());
    }
    parts.iter().map(|p| p.parse::<usize>().map_err(|_| bad())).collect()
}

fn affine(args: &str, iso: AffineIsotropy) -> Result<SpaceEntry> {
    let d = usizes(args, 1, "affine space")?[0];
    if d == 0 {
        return Err(Error::invalid("affine space", "dimension must be positive"));
    }
    Ok(SpaceEntry::with(AffineSpace::new(iso, d), AffineTranslation::new))
}

fn group_space(group: MatrixGroup, args: &str) -> Result<SpaceEntry> {
    let (dim, side) = match args.split_once(':') {
        Some((d, "left")) => (d, Side::Left),
        Some((d, "right")) => (d, Side::Right),
        Some((_, s)) => return Err(Error::unknown("side", s, &["left", "right"])),
        None => (args, Side::Left),
    };
    let d = usizes(dim, 1, "group")?[0];
    let group = match group {
        MatrixGroup::SpecialOrthogonal(_) => MatrixGroup::SpecialOrthogonal(d),
        _ => MatrixGroup::General(d),
    };
    Ok(SpaceEntry::with(LieGroupSpace::new(group, side)?, MaurerCartan::new))
}

fn builtin_families() -> Vec<(&'static str, Family)> {
    vec![
        (
            "affine",
            Family {
                usage: "affine:<d>  (rotations as isotropy)",
                build: |a| affine(a, AffineIsotropy::Orthogonal),
            },
        ),
        (
            "affine_gl",
            Family {
                usage: "affine_gl:<d>  (all of GL(d) as isotropy)",
                build: |a| affine(a, AffineIsotropy::General),
            },
        ),
        (
            "sphere",
            Family {
                usage: "sphere:<ambient dimension>",
                build: |a| {
                    let n = usizes(a, 1, "sphere")?[0];
                    Ok(SpaceEntry::with(Stiefel::sphere(n)?, StiefelConnection::new))
                },
            },
        ),
        (
            "stiefel",
            Family {
                usage: "stiefel:<n>,<k>  (k < n)",
                build: |a| {
                    let v = usizes(a, 2, "stiefel")?;
                    Ok(SpaceEntry::with(Stiefel::new(v[0], v[1])?, StiefelConnection::new))
                },
            },
        ),
        (
            "grassmann",
            Family {
                usage: "grassmann:<n>,<k>",
                build: |a| {
                    let v = usizes(a, 2, "grassmann")?;
                    let s = Isospectral::grassmann(v[0], v[1])?;
                    let c = GrassmannConnection::new(s.clone())?;
                    Ok(SpaceEntry {
                        space: Arc::new(s),
                        connection: Some(Arc::new(c)),
                    })
                },
            },
        ),
        (
            "isospectral",
            Family {
                usage: "isospectral:<value>*<multiplicity>,...",
                build: |a| {
                    let spectrum = a
                        .split(',')
                        .map(|part| {
                            let (v, m) = part.split_once('*').unwrap_or((part, "1"));
                            let v: f64 = v.trim().parse().map_err(|_| Error::invalid("spectrum", format!("bad value '{v}'")))?;
                            let m: usize = m
                                .trim()
                                .parse()
                                .map_err(|_| Error::invalid("spectrum", format!("bad multiplicity '{m}'")))?;
                            Ok((v, m))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let s = Isospectral::new(&spectrum)?;
                    let connection = match GrassmannConnection::new(s.clone()) {
                        Ok(c) => Some(Arc::new(c) as Arc<dyn Connection>),
                        Err(_) => None,
                    };
                    Ok(SpaceEntry {
                        space: Arc::new(s),
                        connection,
                    })
                },
            },
        ),
        (
            "toda",
            Family {
                usage: "toda:<n>  (isospectral manifold of a tridiagonal start)",
                build: |a| {
                    let n = usizes(a, 1, "toda")?[0];
                    Ok(SpaceEntry {
                        space: Arc::new(Isospectral::toda(n)?),
                        connection: None,
                    })
                },
            },
        ),
        (
            "spd",
            Family {
                usage: "spd:<d>",
                build: |a| {
                    let d = usizes(a, 1, "spd")?[0];
                    Ok(SpaceEntry::with(Spd::new(d)?, SpdConnection::new))
                },
            },
        ),
        (
            "so",
            Family {
                usage: "so:<d>[:left|:right]",
                build: |a| group_space(MatrixGroup::SpecialOrthogonal(1), a),
            },
        ),
        (
            "gl",
            Family {
                usage: "gl:<d>[:left|:right]",
                build: |a| group_space(MatrixGroup::General(1), a),
            },
        ),
        (
            "cartan_schouten",
            Family {
                usage: "cartan_schouten:<so3|gl2|...>:<plus|minus|mean>",
                build: |a| {
                    let (g, v) = a
                        .split_once(':')
                        .ok_or_else(|| Error::invalid("cartan-schouten", format!("expected <group>:<variant>, got '{a}'")))?;
                    let s = CartanSchouten::new(MatrixGroup::parse(g)?, CartanVariant::parse(v)?)?;
                    Ok(SpaceEntry::with(s, CartanSchoutenConnection::new))
                },
            },
        ),
    ]
}

/// Spaces addressable as `family:arguments`.
pub struct SpaceRegistry {
    families: BTreeMap<String, Box<dyn SpaceFactory>>,
}

impl SpaceRegistry {
    pub fn builtin() -> Self {
        let families = builtin_families()
            .into_iter()
            .map(|(k, f)| (k.to_string(), Box::new(f) as Box<dyn SpaceFactory>))
            .collect();
        SpaceRegistry { families }
    }

    pub fn register(&mut self, family: &str, factory: Box<dyn SpaceFactory>) {
        self.families.insert(family.to_string(), factory);
    }

    pub fn resolve(&self, name: &str) -> Result<SpaceEntry> {
        let (family, args) = name.split_once(':').unwrap_or((name, ""));
        let factory = self.families.get(family.trim()).ok_or_else(|| {
            let names: Vec<&str> = self.families.keys().map(String::as_str).collect();
            Error::unknown("space family", family, &names)
        })?;
        factory.build(args.trim())
    }

    /// (family, usage) pairs.
    pub fn families(&self) -> Vec<(&str, &'static str)> {
        self.families.iter().map(|(k, f)| (k.as_str(), f.usage())).collect()
    }
}

impl Default for SpaceRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Resolves a name against the built-in families.
pub fn resolve_space(name: &str) -> Result<SpaceEntry> {
    SpaceRegistry::builtin().resolve(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples_resolve_and_round_trip() {
        for name in SPACE_EXAMPLES {
            let e = resolve_space(name).unwrap();
            let canonical = e.space.name();
            assert_eq!(resolve_space(&canonical).unwrap().space.name(), canonical, "{name}");
        }
    }

    #[test]
    fn connections_where_expected() {
        assert!(resolve_space("toda:4").unwrap().connection.is_none());
        assert!(resolve_space("isospectral:2*1,1*2,0*1").unwrap().connection.is_none());
        assert!(resolve_space("isospectral:2*2,1*2").unwrap().connection.is_some());
        assert!(resolve_space("sphere:3").unwrap().connection.is_some());
    }

    #[test]
    fn bad_names() {
        assert!(matches!(resolve_space("torus:2"), Err(Error::UnknownName { .. })));
        assert!(resolve_space("stiefel:5").is_err());
        assert!(resolve_space("stiefel:3,3").is_err());
        assert!(resolve_space("cartan_schouten:so3:sideways").is_err());
    }
}
