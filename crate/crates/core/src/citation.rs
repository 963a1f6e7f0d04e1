//! Fixed table of rule identifiers and the statements they rely on.

/// Statement behind a rule identifier; unknown identifiers map to a fixed
/// placeholder so reports stay total.
pub fn citation(rule: &str) -> &'static str {
    match rule {
        "convergent-sequence" => {
            "A nontrivial sequence of isolated points converging to the filter point gives N_F the JNP (Dirac differences form a JN-sequence)."
        }
        "jnp-iff-dual-ideal-not-tall" => {
            "N_F has the JNP exactly when N_F has a nontrivial convergent sequence, exactly when the dual ideal F* is not tall."
        }
        "free-sum" => {
            "N of a free sum F0 ⊕ F1 has the JNP (resp. BJNP) exactly when N_F0 or N_F1 has it."
        }
        "limit-filter-selector" => {
            "Choosing one point in each block of a limit filter of principal or block filters yields a sequence converging to the filter point."
        }
        "jnp-implies-bjnp" => "Every JN-sequence is in particular a BJN-sequence.",
        "nonpathological-bjnp" => {
            "If F is contained in the dual filter of Exh(φ) for a non-pathological lsc submeasure φ, then N_F has the BJNP; normalized dominated measures on consecutive intervals form the witnessing sequence."
        }
        "density-bjnp" => {
            "Density submeasures are non-pathological, so the dual filter of a density ideal gives a space with the BJNP; the normalized blocks are the witnessing probability measures."
        }
        "summable-bjnp" => {
            "Summable submeasures are additive, hence non-pathological, so the dual filter of a summable ideal gives a space with the BJNP."
        }
        "pathological-blocks" => {
            "If block n carries a submeasure with s_n(X_n) = 1 whose dominated measures have total at most 2^-n, the dual filter of Fin(Σ s_n) is a free F_sigma P-filter without the BJNP."
        }
        "half-mass-set" => {
            "For a submeasure whose dominated measures have total below ε, every nonnegative μ admits A with μ(A) ≥ μ(X)/2 and s(A) ≤ 2ε."
        }
        "prob-form" => {
            "N_F has the BJNP exactly when some sequence of finitely supported probability measures on ω satisfies lim μ_n(A) = 1 for every A in F."
        }
        "bjn-conditions" => {
            "A sequence of norm-one finitely supported measures is a BJN-sequence on N_F when its positive and negative parts each carry mass tending to 1/2 and the mass outside each A in F tends to 0."
        }
        "jn-support" => {
            "A BJN-sequence whose supports lie almost inside every A in F is a JN-sequence."
        }
        "single-measure" => {
            "N_F has the BJNP exactly when one measure μ and disjoint finite blocks satisfy μ(A_n ∩ U)/μ(A_n) → 1 for every U in F."
        }
        "katetov-transfer" => {
            "A probability measure with atoms below ε/(2|A|) can be pushed onto any probability measure on A with every set discrepancy below ε."
        }
        "katetov-maximal" => {
            "Every filter G with the BJNP satisfies G ≤_K F_d; block-wise transfer maps from the density blocks onto the supports of a witnessing probability sequence give the reduction."
        }
        "separation" => {
            "For 0 < p < q ≤ 1 and any bijection f of ω there is a set with divergent p-sum whose f-image has convergent q-sum, so the summable filters for p and q are not isomorphic."
        }
        "schachermayer" => {
            "The Stone space of the algebra of sets that eventually contain 2k exactly when they contain 2k+1 carries the JN-sequence ½(δ_2n − δ_2n+1), while an aligned probability sequence cannot converge to 1 on both members E and O of a complementary pair."
        }
        "finite-set" => "Finite sets belong to every ideal of the form Exh(φ) or Fin(φ).",
        _ => "No certified rule applies.",
    }
}
