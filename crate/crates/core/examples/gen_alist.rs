use lprx_core::equalizer::codes;
fn main() {
    std::fs::write("models/hamming74.alist", codes::hamming74().to_alist()).unwrap();
    std::fs::write("models/triangle.alist", codes::triangle().to_alist()).unwrap();
    std::fs::write("models/ldpc20.alist", codes::ldpc_20().to_alist()).unwrap();
}
