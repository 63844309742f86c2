// ndarray-linalg is used with default features off (the bundled BLAS source
// builds don't work in every environment), so the LAPACK symbols declared by
// lapack-sys must be provided here. OpenBLAS ships a full LAPACK.
fn main() {
    println!("cargo:rustc-link-search=native=/usr/lib/x86_64-linux-gnu");
    println!("cargo:rustc-link-lib=dylib=openblas");
}
