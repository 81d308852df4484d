//! Connected vacuum diagrams built from quartic vertices.
//!
//! The variational subtraction removes every self-contraction, so a valid
//! diagram has no loops at a vertex and every vertex carries exactly four
//! propagator ends.

use serde::Serialize;

use crate::error::{Error, Result};

/// `k` parallel propagators between vertices `a` and `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub power: u32,
}

impl Edge {
    pub const fn new(a: usize, b: usize, power: u32) -> Self {
        Edge { a, b, power }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagramSpec {
    pub name: String,
    /// Number of vertices.
    pub order: usize,
    pub edges: Vec<Edge>,
    /// Number of Wick contractions that produce this topology.
    pub symmetry_factor: u64,
    /// Set when the edge list had to be repaired at construction.
    pub correction: Option<String>,
}

const VERTEX_DEGREE: u32 = 4;

impl DiagramSpec {
    pub fn new(name: &str, order: usize, edges: Vec<Edge>, symmetry_factor: u64) -> Result<Self> {
        let d = DiagramSpec {
            name: name.to_string(),
            order,
            edges,
            symmetry_factor,
            correction: None,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(Error::InvalidDiagram(format!("{}: needs at least two vertices", self.name)));
        }
        if self.symmetry_factor == 0 {
            return Err(Error::InvalidDiagram(format!("{}: zero symmetry factor", self.name)));
        }
        for e in &self.edges {
            if e.a >= self.order || e.b >= self.order {
                return Err(Error::InvalidDiagram(format!("{}: edge {e:?} out of range", self.name)));
            }
            if e.a == e.b {
                return Err(Error::InvalidDiagram(format!("{}: self-loop at vertex {}", self.name, e.a)));
            }
            if e.power == 0 {
                return Err(Error::InvalidDiagram(format!("{}: edge {e:?} has zero power", self.name)));
            }
        }
        let deg = self.degrees();
        if let Some((v, d)) = deg.iter().enumerate().find(|(_, &d)| d != VERTEX_DEGREE) {
            return Err(Error::InvalidDiagram(format!(
                "{}: vertex {v} has degree {d}, expected {VERTEX_DEGREE} (degrees {deg:?})",
                self.name
            )));
        }
        if !self.is_connected() {
            return Err(Error::InvalidDiagram(format!("{}: not connected", self.name)));
        }
        Ok(())
    }

    pub fn degrees(&self) -> Vec<u32> {
        let mut deg = vec![0; self.order];
        for e in &self.edges {
            if e.a < self.order && e.b < self.order {
                deg[e.a] += e.power;
                deg[e.b] += e.power;
            }
        }
        deg
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.order];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for e in &self.edges {
                let other = if e.a == v {
                    e.b
                } else if e.b == v {
                    e.a
                } else {
                    continue;
                };
                if !seen[other] {
                    seen[other] = true;
                    stack.push(other);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// `(−1)^(n+1)`
    pub fn sign(&self) -> f64 {
        if self.order.is_multiple_of(2) {
            -1.0
        } else {
            1.0
        }
    }

    pub fn propagator_count(&self) -> u32 {
        self.edges.iter().map(|e| e.power).sum()
    }

    /// Same topology with vertex `v` renamed to `perm[v]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        let mut check = perm.to_vec();
        check.sort_unstable();
        if perm.len() != self.order || check.iter().enumerate().any(|(i, &p)| i != p) {
            return Err(Error::InvalidDiagram(format!("{perm:?} is not a permutation of 0..{}", self.order)));
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Edge::new(perm[e.a], perm[e.b], e.power))
            .collect();
        DiagramSpec::new(&self.name, self.order, edges, self.symmetry_factor)
    }
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

fn binomial(n: u64, k: u64) -> u64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Edge list of the double-bridge diagram as it is commonly printed
/// (`G²₁₂ G²₃₄ G₂₃ G²₂₄ G₁₃ G²₁₄`, zero-based here). Its vertex degrees are
/// (5, 5, 4, 6).
pub fn double_bridge_printed_edges() -> Vec<Edge> {
    vec![
        Edge::new(0, 1, 2),
        Edge::new(2, 3, 2),
        Edge::new(1, 2, 1),
        Edge::new(1, 3, 2),
        Edge::new(0, 2, 1),
        Edge::new(0, 3, 2),
    ]
}

/// Two double bonds (1–2, 3–4) joined crosswise by four single propagators:
/// the only degree-4 assignment with that skeleton.
fn double_bridge_edges() -> Vec<Edge> {
    vec![
        Edge::new(0, 1, 2),
        Edge::new(2, 3, 2),
        Edge::new(0, 2, 1),
        Edge::new(0, 3, 1),
        Edge::new(1, 2, 1),
        Edge::new(1, 3, 1),
    ]
}

/// The five connected diagrams through fourth order: `2`, `3`, `4a`
/// (square), `4b` (double bridge) and `4c` (triple bonds).
pub fn builtin_diagrams() -> Vec<DiagramSpec> {
    let c42 = binomial(4, 2);
    let c43 = binomial(4, 3);
    let ring4 = factorial(4) / (4 * 2);

    let n2 = factorial(4);
    let n3 = factorial(3) / (3 * 2) * (2 * c42).pow(3);
    let n4a = ring4 * (2 * c42).pow(4);
    let n4b = ring4 * (c42 * 2 * c42).pow(2) * 2u64.pow(4);
    let n4c = ring4 * (c43 * factorial(3) * c43).pow(2) * 2;

    let second = DiagramSpec::new("2", 2, vec![Edge::new(0, 1, 4)], n2);
    let third = DiagramSpec::new(
        "3",
        3,
        vec![Edge::new(0, 1, 2), Edge::new(1, 2, 2), Edge::new(2, 0, 2)],
        n3,
    );
    let square = DiagramSpec::new(
        "4a",
        4,
        vec![
            Edge::new(0, 1, 2),
            Edge::new(1, 2, 2),
            Edge::new(2, 3, 2),
            Edge::new(3, 0, 2),
        ],
        n4a,
    );
    let bridge = DiagramSpec::new("4b", 4, double_bridge_printed_edges(), n4b).or_else(|err| {
        let mut d = DiagramSpec::new("4b", 4, double_bridge_edges(), n4b)?;
        d.correction = Some(format!(
            "printed propagator powers rejected ({err}); using G²₁₂ G²₃₄ G₁₃ G₁₄ G₂₃ G₂₄"
        ));
        Ok::<_, Error>(d)
    });
    let triple = DiagramSpec::new(
        "4c",
        4,
        vec![
            Edge::new(0, 1, 3),
            Edge::new(2, 3, 3),
            Edge::new(1, 2, 1),
            Edge::new(3, 0, 1),
        ],
        n4c,
    );
    [second, third, square, bridge, triple]
        .into_iter()
        .map(|d| d.expect("built-in diagrams are valid"))
        .collect()
}

pub fn diagrams_of_order(order: usize) -> Vec<DiagramSpec> {
    builtin_diagrams()
        .into_iter()
        .filter(|d| d.order == order)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetry_factors() {
        let n: Vec<u64> = builtin_diagrams().iter().map(|d| d.symmetry_factor).collect();
        assert_eq!(n, vec![24, 1728, 62208, 248832, 55296]);
    }

    #[test]
    fn builtins_are_valid_and_repaired_bridge_is_flagged() {
        for d in builtin_diagrams() {
            d.validate().unwrap();
            assert!(d.degrees().iter().all(|&k| k == 4));
            assert_eq!(d.propagator_count() as usize, 2 * d.order);
            assert_eq!(d.correction.is_some(), d.name == "4b");
        }
    }

    #[test]
    fn printed_bridge_fails_degree_check() {
        let err = DiagramSpec::new("4b", 4, double_bridge_printed_edges(), 1).unwrap_err();
        assert!(err.to_string().contains("degree"));
        let d = DiagramSpec {
            name: "x".into(),
            order: 4,
            edges: double_bridge_printed_edges(),
            symmetry_factor: 1,
            correction: None,
        };
        assert_eq!(d.degrees(), vec![5, 5, 4, 6]);
    }

    #[test]
    fn rejects_self_loops_and_disconnected_graphs() {
        let looped = DiagramSpec::new("l", 2, vec![Edge::new(0, 0, 2), Edge::new(0, 1, 2), Edge::new(1, 1, 2)], 1);
        assert!(looped.unwrap_err().to_string().contains("self-loop"));
        let split = DiagramSpec::new("s", 4, vec![Edge::new(0, 1, 4), Edge::new(2, 3, 4)], 1);
        assert!(split.unwrap_err().to_string().contains("connected"));
    }

    #[test]
    fn signs_alternate() {
        let signs: Vec<f64> = builtin_diagrams().iter().map(|d| d.sign()).collect();
        assert_eq!(signs, vec![-1.0, 1.0, -1.0, -1.0, -1.0]);
    }

    #[test]
    fn relabeling_keeps_validity() {
        let d = &diagrams_of_order(4)[1];
        let r = d.relabeled(&[2, 0, 3, 1]).unwrap();
        assert_eq!(r.degrees(), vec![4; 4]);
        assert!(d.relabeled(&[0, 0, 1, 2]).is_err());
    }
}
