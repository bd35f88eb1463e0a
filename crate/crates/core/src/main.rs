fn main() {
    let a = ndarray::arr2(&[[3.0_f64, 0.0], [0.0, 1.0]]);
    use ndarray_linalg::SVD;
    let (_, s, _) = a.svd(true, true).unwrap();
    println!("svd ok: {:?}", s);
}
