//! Named structures used across the workbench.

use super::FiniteStructure;

/// The 2-cover of a tournament: vertex `(x, m)` is `2x + m`, `m = 0` for C
/// and `1` for P; `(x,i) -> (y,j)` iff `x -> y` with `i != j`, or `y -> x`
/// with `i = j`.
pub fn hat_cover(t: &FiniteStructure) -> FiniteStructure {
    let k = t.len();
    let mut s = FiniteStructure::new(2 * k);
    for x in 0..k {
        for y in 0..k {
            if x == y {
                continue;
            }
            for i in 0..2 {
                for j in 0..2 {
                    let arc = if i != j { t.has_arc(x, y) } else { t.has_arc(y, x) };
                    if arc {
                        s.orient(2 * x + i, 2 * y + j);
                    }
                }
            }
        }
    }
    s
}

/// Full cover of the linear order on `k` columns; column `i` is `{2i, 2i+1}`.
pub fn hatq_full(k: usize) -> FiniteStructure {
    hat_cover(&FiniteStructure::linear_tournament(k))
}

/// Two 2-element columns `{0,1}`, `{2,3}` joined by the 4-cycle `0,2,1,3`.
pub fn semi_generic_general_position() -> FiniteStructure {
    FiniteStructure::from_arcs(4, &[(0, 2), (2, 1), (1, 3), (3, 0)]).expect("valid")
}

/// Complete multipartite digraph with the given class sizes; cross arcs
/// point from the lower-indexed class to the higher one.
pub fn multipartite(sizes: &[usize]) -> FiniteStructure {
    let n: usize = sizes.iter().sum();
    let mut class = Vec::with_capacity(n);
    for (c, &sz) in sizes.iter().enumerate() {
        class.extend(std::iter::repeat_n(c, sz));
    }
    let mut s = FiniteStructure::new(n);
    for x in 0..n {
        for y in 0..n {
            if class[x] < class[y] {
                s.orient(x, y);
            }
        }
    }
    s
}
