use crate::image::Coord;

/// Offsets `(dr, dc)` of the closed disc of radius `d`, row-major.
pub(crate) fn disc_offsets(d: usize) -> Vec<(isize, isize)> {
    let r = d as isize;
    let r2 = r * r;
    (-r..=r)
        .flat_map(|dr| (-r..=r).map(move |dc| (dr, dc)))
        .filter(|&(dr, dc)| dr * dr + dc * dc <= r2)
        .collect()
}

/// All in-bounds pixels within Euclidean distance `d` of `x` (including `x`),
/// in row-major order.
pub fn search_window(x: Coord, d: usize, width: usize, height: usize) -> Vec<Coord> {
    disc_offsets(d)
        .into_iter()
        .filter_map(|(dr, dc)| {
            let row = x.row.checked_add_signed(dr)?;
            let col = x.col.checked_add_signed(dc)?;
            (row < height && col < width).then_some(Coord::new(row, col))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_sizes() {
        let x = Coord::new(20, 20);
        assert_eq!(search_window(x, 0, 40, 40), vec![x]);
        assert_eq!(search_window(x, 4, 40, 40).len(), 49);
        assert_eq!(search_window(x, 5, 40, 40).len(), 81);
    }

    #[test]
    fn lattice_count_matches_enumeration() {
        for d in 0..16usize {
            let brute = (-(d as i64)..=d as i64)
                .flat_map(|i| (-(d as i64)..=d as i64).map(move |j| i * i + j * j))
                .filter(|&s| s <= (d * d) as i64)
                .count();
            assert_eq!(disc_offsets(d).len(), brute);
        }
    }

    #[test]
    fn clipped_at_corner_and_row_major() {
        let w = search_window(Coord::new(0, 0), 2, 10, 10);
        assert_eq!(
            w,
            vec![
                Coord::new(0, 0),
                Coord::new(0, 1),
                Coord::new(0, 2),
                Coord::new(1, 0),
                Coord::new(1, 1),
                Coord::new(2, 0)
            ]
        );
        assert!(w.windows(2).all(|p| p[0] < p[1]));
    }
}
