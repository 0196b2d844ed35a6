mod common;

#[test]
fn superposition_states_match_oracle() {
    common::superposition_family().unwrap();
}

#[test]
fn micro_macro_states_match_oracle() {
    common::micro_macro_family().unwrap();
}

#[test]
fn two_mode_entangled_states_match_oracle() {
    common::two_mode_family().unwrap();
}

#[test]
fn split_and_lossy_states_match_oracle() {
    common::split_family().unwrap();
}
