fn main() {
    // LAPACK provider for ndarray-linalg. OpenBLAS bundles BLAS + LAPACK,
    // so a single link line covers zgeev/zheev/zgesv.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
