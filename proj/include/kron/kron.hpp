#pragma once

// Umbrella header: exact linear algebra over rationals, prime fields and
// extension towers; weak Kronecker reduction of matrix pencils; intertwiner
// spaces and similarity/equivalence certificates; certificate descent to
// subfields; JSON I/O; seeded random instance generators.

#include "kron/common.hpp"
#include "kron/fields.hpp"
#include "kron/matrices.hpp"
#include "kron/pencil.hpp"
#include "kron/intertwine.hpp"
#include "kron/descent.hpp"
#include "kron/equiv_bridge.hpp"
#include "kron/io.hpp"
#include "kron/random_gen.hpp"
