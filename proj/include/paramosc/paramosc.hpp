#pragma once

#include "paramosc/analysis.hpp"
#include "paramosc/classical.hpp"
#include "paramosc/core.hpp"
#include "paramosc/dynamics.hpp"
#include "paramosc/errors.hpp"
#include "paramosc/hermite.hpp"
#include "paramosc/io.hpp"
#include "paramosc/ode.hpp"
#include "paramosc/spectral.hpp"
