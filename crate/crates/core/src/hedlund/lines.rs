use crate::spacetime::{family_shift, Vector};

/// The two axes transverse to family `f`.
#[inline]
pub fn transverse_axes(f: usize) -> (usize, usize) {
    match f {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// A single line `{x : x_a = off[0], x_b = off[1]}` of family `f`, with `(a, b)` the transverse axes.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Line {
    pub family: usize,
    pub offset: [f64; 2],
}

impl Line {
    pub fn new(family: usize, offset: [f64; 2]) -> Line {
        Line { family, offset }
    }

    /// Line of family `f` nearest to `p`.
    pub fn nearest_of(f: usize, p: &Vector<3>) -> Line {
        let s = family_shift(f);
        let (a, b) = transverse_axes(f);
        Line {
            family: f,
            offset: [s[a] + (p[a] - s[a]).round(), s[b] + (p[b] - s[b]).round()],
        }
    }

    /// Whether the offsets match the lattice of family `f`.
    pub fn is_valid(&self) -> bool {
        let s = family_shift(self.family);
        let (a, b) = transverse_axes(self.family);
        let ok = |x: f64, c: f64| ((x - c) - (x - c).round()).abs() < 1e-9;
        ok(self.offset[0], s[a]) && ok(self.offset[1], s[b])
    }

    pub fn point(&self, t: f64) -> Vector<3> {
        let (a, b) = transverse_axes(self.family);
        let mut p = Vector::<3>::zeros();
        p[self.family] = t;
        p[a] = self.offset[0];
        p[b] = self.offset[1];
        p
    }

    pub fn coord(&self, axis: usize) -> Option<f64> {
        let (a, b) = transverse_axes(self.family);
        if axis == a {
            Some(self.offset[0])
        } else if axis == b {
            Some(self.offset[1])
        } else {
            None
        }
    }

    pub fn dist(&self, p: &Vector<3>) -> f64 {
        let (a, b) = transverse_axes(self.family);
        let u = p[a] - self.offset[0];
        let w = p[b] - self.offset[1];
        (u * u + w * w).sqrt()
    }

    /// Orthogonal projection of `p` onto the line.
    pub fn project(&self, p: &Vector<3>) -> Vector<3> {
        self.point(p[self.family])
    }

    pub fn same(&self, o: &Line) -> bool {
        self.family == o.family && (self.offset[0] - o.offset[0]).abs() < 1e-9 && (self.offset[1] - o.offset[1]).abs() < 1e-9
    }
}

/// The three line families `Lᵢ = lᵢ + ℤ³`.
#[derive(Clone, Copy, Debug)]
pub struct LineSystem {
    pub eps: f64,
}

impl LineSystem {
    pub fn new(eps: f64) -> Self {
        LineSystem { eps }
    }

    pub fn nearest(&self, p: &Vector<3>) -> (Line, f64) {
        (0..3)
            .map(|f| {
                let l = Line::nearest_of(f, p);
                let d = l.dist(p);
                (l, d)
            })
            .fold(None, |acc: Option<(Line, f64)>, x| match acc {
                Some(a) if a.1 <= x.1 => Some(a),
                _ => Some(x),
            })
            .unwrap()
    }

    pub fn dist(&self, p: &Vector<3>) -> f64 {
        self.nearest(p).1
    }

    /// Line through `p` up to `tol`.
    pub fn line_through(&self, p: &Vector<3>, tol: f64) -> Option<Line> {
        let (l, d) = self.nearest(p);
        (d <= tol).then_some(l)
    }

    /// Tube component of `B_ε(L)` containing `p`.
    pub fn component(&self, p: &Vector<3>) -> Option<Line> {
        let (l, d) = self.nearest(p);
        (d < self.eps).then_some(l)
    }
}
