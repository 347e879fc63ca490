#pragma once

#include "bdspectral/asymptotics.hpp"
#include "bdspectral/chain.hpp"
#include "bdspectral/chebyshev.hpp"
#include "bdspectral/measure.hpp"
#include "bdspectral/quadrature.hpp"
