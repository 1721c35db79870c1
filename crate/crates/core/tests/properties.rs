//! Property suite; see `common/props.rs`.

#[path = "common/props.rs"]
mod props;

macro_rules! check {
    ($($name:ident),*) => {
        $(
            #[test]
            fn $name() {
                if let Err(e) = props::$name() {
                    panic!("{e}");
                }
            }
        )*
    };
}

check!(
    zeckendorf_round_trip,
    zeckendorf_unique,
    tau_norm_identity,
    dependence_matches_brute_force,
    lll_invariants_and_distance_bound,
    cf_gap_bound_is_valid,
    matveev_holds_on_samples,
    laurent_holds_on_samples,
    instances_match_brute_force
);
