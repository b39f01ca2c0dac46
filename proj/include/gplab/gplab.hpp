#pragma once

#include "gplab/diagnostics.hpp"
#include "gplab/errors.hpp"
#include "gplab/grid.hpp"
#include "gplab/hydro.hpp"
#include "gplab/lab.hpp"
#include "gplab/linear_ops.hpp"
#include "gplab/modulation.hpp"
#include "gplab/soliton.hpp"
#include "gplab/verification.hpp"
