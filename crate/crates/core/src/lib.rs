pub mod correlation;
pub mod extend;
pub mod fhs;
pub mod format;
pub mod galois;
pub mod labeling;
pub mod numbers;
pub mod oc;
pub mod partition;
