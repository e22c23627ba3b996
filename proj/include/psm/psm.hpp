#pragma once

#include "psm/basis_factorization.hpp"
#include "psm/engine.hpp"
#include "psm/errors.hpp"
#include "psm/experiments.hpp"
#include "psm/io.hpp"
#include "psm/oracle.hpp"
#include "psm/program.hpp"
#include "psm/reductions.hpp"
