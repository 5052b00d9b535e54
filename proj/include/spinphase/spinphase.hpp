#pragma once

#include "spinphase/analytic.hpp"
#include "spinphase/deformation.hpp"
#include "spinphase/errors.hpp"
#include "spinphase/geom3.hpp"
#include "spinphase/io.hpp"
#include "spinphase/momentum.hpp"
#include "spinphase/phase.hpp"
#include "spinphase/reconstruct.hpp"
#include "spinphase/scenario.hpp"
#include "spinphase/verify.hpp"
