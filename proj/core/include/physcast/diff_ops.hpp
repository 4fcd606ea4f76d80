#pragma once

#include "physcast/field.hpp"

namespace physcast {

// Finite differences on a unit-spaced grid: central in the interior,
// one-sided (forward at the first index, backward at the last) on edges.
ScalarField ddx(const ScalarField& f);
ScalarField ddy(const ScalarField& f);

// Transposes of ddx/ddy as linear maps, used to back-propagate through them.
ScalarField ddx_adjoint(const ScalarField& g);
ScalarField ddy_adjoint(const ScalarField& g);

VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& w);

}  // namespace physcast
