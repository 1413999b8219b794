//! Coordinate charts for the three manifolds the toolkit works on: the base
//! pre-symplectic manifold in Darboux coordinates, its kernel-dual thickening,
//! and the cotangent bundle with adapted momentum coordinates.
//!
//! A chart fixes a total coordinate order once; every sparse form index, every
//! matrix row, and every serialized tuple refers to that order. Base charts
//! list `x1..xm, y1..ym, z1..zr`; the thickened chart appends the kernel-dual
//! fibers `p1..pr`; the cotangent chart appends `px1..pxm, py1..pym, pz1..pzr`.

use std::fmt;

/// Role of a coordinate within a chart. The label is 1-based and matches the
/// printed name (`x1`, `pz2`, ...).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CoordRole {
    BaseX(usize),
    BaseY(usize),
    BaseZ(usize),
    /// Kernel-dual fiber coordinate `p_a` on the thickened chart.
    FiberP(usize),
    MomentumPx(usize),
    MomentumPy(usize),
    MomentumPz(usize),
}

impl CoordRole {
    pub fn is_base(&self) -> bool {
        matches!(
            self,
            CoordRole::BaseX(_) | CoordRole::BaseY(_) | CoordRole::BaseZ(_)
        )
    }

    pub fn is_fiber(&self) -> bool {
        matches!(self, CoordRole::FiberP(_))
    }

    pub fn is_momentum(&self) -> bool {
        matches!(
            self,
            CoordRole::MomentumPx(_) | CoordRole::MomentumPy(_) | CoordRole::MomentumPz(_)
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChartKind {
    /// Darboux chart on the base manifold, dimension `2m + r`.
    Base,
    /// Base chart plus the kernel-dual fibers `p1..pr`.
    Thickened,
    /// Adapted chart on the cotangent bundle, dimension `2(2m + r)`.
    Cotangent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Coordinate {
    name: String,
    role: CoordRole,
}

/// An ordered coordinate system with `m` symplectic pairs and `r` kernel
/// directions. Immutable after construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    m: usize,
    r: usize,
    kind: ChartKind,
    coords: Vec<Coordinate>,
}

impl Chart {
    /// Darboux chart `x1..xm, y1..ym, z1..zr` on the base manifold.
    pub fn base(m: usize, r: usize) -> Chart {
        let mut coords = Vec::with_capacity(2 * m + r);
        for j in 1..=m {
            coords.push(Coordinate {
                name: format!("x{j}"),
                role: CoordRole::BaseX(j),
            });
        }
        for j in 1..=m {
            coords.push(Coordinate {
                name: format!("y{j}"),
                role: CoordRole::BaseY(j),
            });
        }
        for a in 1..=r {
            coords.push(Coordinate {
                name: format!("z{a}"),
                role: CoordRole::BaseZ(a),
            });
        }
        Chart {
            m,
            r,
            kind: ChartKind::Base,
            coords,
        }
    }

    /// Base chart extended by the kernel-dual fiber coordinates `p1..pr`.
    pub fn thickened(m: usize, r: usize) -> Chart {
        let mut chart = Chart::base(m, r);
        for a in 1..=r {
            chart.coords.push(Coordinate {
                name: format!("p{a}"),
                role: CoordRole::FiberP(a),
            });
        }
        chart.kind = ChartKind::Thickened;
        chart
    }

    /// Adapted cotangent chart `x, y, z, px1..pxm, py1..pym, pz1..pzr`.
    pub fn cotangent(m: usize, r: usize) -> Chart {
        let mut chart = Chart::base(m, r);
        for j in 1..=m {
            chart.coords.push(Coordinate {
                name: format!("px{j}"),
                role: CoordRole::MomentumPx(j),
            });
        }
        for j in 1..=m {
            chart.coords.push(Coordinate {
                name: format!("py{j}"),
                role: CoordRole::MomentumPy(j),
            });
        }
        for a in 1..=r {
            chart.coords.push(Coordinate {
                name: format!("pz{a}"),
                role: CoordRole::MomentumPz(a),
            });
        }
        chart.kind = ChartKind::Cotangent;
        chart
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Dimension of the underlying base manifold, `2m + r`.
    pub fn base_dim(&self) -> usize {
        2 * self.m + self.r
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn kind(&self) -> ChartKind {
        self.kind
    }

    pub fn name(&self, index: usize) -> &str {
        &self.coords[index].name
    }

    pub fn role(&self, index: usize) -> CoordRole {
        self.coords[index].role
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.coords.iter().map(|c| c.name.as_str())
    }

    /// Index of `x_j`, `j` 0-based and `< m`.
    pub fn x_index(&self, j: usize) -> usize {
        debug_assert!(j < self.m);
        j
    }

    /// Index of `y_j`, `j` 0-based.
    pub fn y_index(&self, j: usize) -> usize {
        debug_assert!(j < self.m);
        self.m + j
    }

    /// Index of `z_a`, `a` 0-based and `< r`.
    pub fn z_index(&self, a: usize) -> usize {
        debug_assert!(a < self.r);
        2 * self.m + a
    }

    /// Index of the fiber coordinate `p_a` on a thickened chart.
    pub fn p_index(&self, a: usize) -> usize {
        debug_assert!(self.kind == ChartKind::Thickened && a < self.r);
        2 * self.m + self.r + a
    }

    pub fn px_index(&self, j: usize) -> usize {
        debug_assert!(self.kind == ChartKind::Cotangent && j < self.m);
        2 * self.m + self.r + j
    }

    pub fn py_index(&self, j: usize) -> usize {
        debug_assert!(self.kind == ChartKind::Cotangent && j < self.m);
        3 * self.m + self.r + j
    }

    pub fn pz_index(&self, a: usize) -> usize {
        debug_assert!(self.kind == ChartKind::Cotangent && a < self.r);
        4 * self.m + self.r + a
    }

    pub fn is_base_coord(&self, index: usize) -> bool {
        self.coords[index].role.is_base()
    }

    /// Indices of the non-base coordinates (fibers or momenta).
    pub fn fiber_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim()).filter(|&i| !self.is_base_coord(i))
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for c in &self.coords {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{}", c.name)?;
            first = false;
        }
        Ok(())
    }
}

/// A point of a chart: one double per coordinate, in chart order.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(values: Vec<f64>) -> Point {
        Point(values)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn origin(dim: usize) -> Point {
        Point(vec![0.0; dim])
    }
}

impl std::ops::Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for Point {
    fn from(values: Vec<f64>) -> Point {
        Point(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_chart_layout() {
        let c = Chart::base(2, 1);
        assert_eq!(c.dim(), 5);
        assert_eq!(c.name(0), "x1");
        assert_eq!(c.name(2), "y1");
        assert_eq!(c.name(4), "z1");
        assert_eq!(c.index_of("y2"), Some(3));
        assert_eq!(c.index_of("p1"), None);
    }

    #[test]
    fn cotangent_chart_layout() {
        let c = Chart::cotangent(1, 1);
        assert_eq!(c.dim(), 6);
        let names: Vec<_> = c.names().collect();
        assert_eq!(names, vec!["x1", "y1", "z1", "px1", "py1", "pz1"]);
        assert_eq!(c.pz_index(0), 5);
        assert!(c.role(5).is_momentum());
    }

    #[test]
    fn cotangent_dimension_is_even() {
        for (m, r) in [(0, 1), (1, 0), (1, 1), (2, 3)] {
            assert_eq!(Chart::cotangent(m, r).dim() % 2, 0);
        }
    }

    #[test]
    fn names_are_unique() {
        let c = Chart::cotangent(3, 2);
        let mut names: Vec<_> = c.names().collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), c.dim());
    }

    #[test]
    fn thickened_fibers_follow_base() {
        let c = Chart::thickened(1, 2);
        assert_eq!(c.dim(), 6);
        assert_eq!(c.name(c.p_index(1)), "p2");
        assert!(c.is_base_coord(2));
        assert!(!c.is_base_coord(4));
        assert_eq!(c.fiber_indices().collect::<Vec<_>>(), vec![4, 5]);
    }
}
