#pragma once

#include "mfopt/model.hpp"
#include "mfopt/numerics.hpp"
#include "mfopt/oracle.hpp"
#include "mfopt/simulate.hpp"
#include "mfopt/synthesis.hpp"
