fn main() {
    // the `lapack` feature resolves its Fortran symbols from the system OpenBLAS
    if std::env::var_os("CARGO_FEATURE_LAPACK").is_some() {
        println!("cargo:rustc-link-lib=openblas");
    }
}
