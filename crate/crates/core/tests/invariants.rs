//! Property suites over random inputs.

mod common;

#[test]
fn norm_axioms() {
    common::norm_axioms().unwrap();
}

#[test]
fn shell_partition_counts() {
    common::shell_partition_counts().unwrap();
}

#[test]
fn affine_enumeration_is_shift_equivariant() {
    common::affine_shift_equivariance().unwrap();
}

#[test]
fn split_identity_v1_norm_is_applied_norm() {
    common::split_identity().unwrap();
}

#[test]
fn chi_equals_psi() {
    common::chi_equals_psi().unwrap();
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    common::thread_determinism().unwrap();
}
