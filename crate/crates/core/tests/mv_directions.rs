use pmean::mv::{colinearity_score, trajectory, MVSNSpec, MVTrajectory};
use pmean::pmean::p_grid;

const N: usize = 100_000;

fn run(lambda: [f64; 2], seed: u64) -> MVTrajectory {
    let grid = p_grid(1.0, 4.0, 0.5).unwrap();
    trajectory(&MVSNSpec::standard(lambda.to_vec()).unwrap(), &grid, N, seed).unwrap()
}

fn angle(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (dot / (na * nb)).clamp(-1.0, 1.0).acos()
}

#[test]
fn diagonal_skew_moves_along_the_diagonal() {
    let t = run([5.0, 5.0], 1);
    let taus: Vec<&[f64]> = t.reliable_tangents().map(|(_, tau)| tau).collect();
    assert_eq!(taus.len(), 7);
    for tau in &taus {
        let a = angle(tau, &[1.0, 1.0]);
        assert!(a <= 0.1, "tangent {tau:?} is {a} rad off the diagonal");
    }
    // approximately the same direction for every p
    for (i, a) in taus.iter().enumerate() {
        for b in &taus[i + 1..] {
            assert!(angle(a, b) <= 0.1);
        }
    }
}

#[test]
fn axis_skew_moves_along_its_axis() {
    let t = run([0.0, 5.0], 2);
    assert!(colinearity_score(&t, &[0.0, 1.0]).unwrap() >= 0.99);

    let t = run([5.0, 0.0], 1);
    assert!(colinearity_score(&t, &[1.0, 0.0]).unwrap() >= 0.99);
    let off = t
        .reliable_tangents()
        .map(|(_, tau)| tau[1].abs())
        .fold(0.0, f64::max);
    assert!(off <= 0.15, "largest |cosine| with the orthogonal direction {off}");
    assert!(colinearity_score(&t, &[0.0, 1.0]).unwrap() <= 0.15);
}
