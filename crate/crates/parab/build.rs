fn main() {
    // Non-rigorous numerics (eigendecomposition, LU solves) go through the
    // system LAPACK; everything rigorous is done in-crate.
    println!("cargo:rustc-link-lib=dylib=lapack");
    println!("cargo:rustc-link-lib=dylib=blas");
}
