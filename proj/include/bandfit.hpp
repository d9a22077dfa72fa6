#pragma once

#include "bandfit/bezier_seed.hpp"
#include "bandfit/constraints.hpp"
#include "bandfit/continuation.hpp"
#include "bandfit/curve_io.hpp"
#include "bandfit/error.hpp"
#include "bandfit/fft.hpp"
#include "bandfit/geometry.hpp"
#include "bandfit/kinematics.hpp"
#include "bandfit/linalg.hpp"
#include "bandfit/spectral.hpp"
#include "bandfit/svg.hpp"
