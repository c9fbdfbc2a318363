#pragma once

#include "core/rng.hpp"
#include "core/tape.hpp"

namespace cadet {

// Power-iteration estimate of the spectral radius of a non-negative matrix:
// t updates a <- a'W / |a'W|, b <- Wb / |Wb| from standard-normal starts, then
// a'Wb / (a'b). The last two iterates are averaged before the final quotient,
// which makes the estimate exact for period-2 iterations (e.g. symmetric
// permutation blocks) and is a no-op once the iteration has converged.
// Vanishing |a'W| or |Wb| short-circuits to 0; a near-orthogonal a'b triggers
// one redraw, then 0 with a warning.
double spectral_penalty(const Tensor& w, int t, Rng& rng);

// Taped version. a and b are treated as constants, so the gradient w.r.t. W is
// exactly a b' / (a'b); implemented as sum(W * M) with constant M, whose value
// equals the quotient above.
Var spectral_penalty_var(Tape& tape, const Var& w, int t, Rng& rng);

}  // namespace cadet
