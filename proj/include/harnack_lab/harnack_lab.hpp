#pragma once
// Everything at once.

#include "harnack_lab/axioms.hpp"
#include "harnack_lab/capacity.hpp"
#include "harnack_lab/conditions.hpp"
#include "harnack_lab/exit_measures.hpp"
#include "harnack_lab/exterior_data.hpp"
#include "harnack_lab/geometry.hpp"
#include "harnack_lab/harnack.hpp"
#include "harnack_lab/intrinsic.hpp"
#include "harnack_lab/kernels.hpp"
#include "harnack_lab/lp.hpp"
#include "harnack_lab/quadrature.hpp"
#include "harnack_lab/random.hpp"
#include "harnack_lab/report.hpp"
