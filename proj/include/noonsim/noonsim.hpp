#pragma once

#include "noonsim/mode.hpp"
#include "noonsim/fock.hpp"
#include "noonsim/unitary.hpp"
#include "noonsim/op_poly.hpp"
#include "noonsim/optics.hpp"
#include "noonsim/pdc.hpp"
#include "noonsim/heralding.hpp"
#include "noonsim/experiments.hpp"
#include "noonsim/io.hpp"
