#pragma once

#include "slfib/error.hpp"
#include "slfib/boundary.hpp"
#include "slfib/field.hpp"
#include "slfib/calibration.hpp"
#include "slfib/explicit_models.hpp"
#include "slfib/newton.hpp"
#include "slfib/disc_solver.hpp"
#include "slfib/strip_solver.hpp"
#include "slfib/singularity.hpp"
#include "slfib/io.hpp"
#include "slfib/fibration.hpp"
#include "slfib/monodromy.hpp"
