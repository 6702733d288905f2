#pragma once

#include "pexp/closure.hpp"
#include "pexp/cycles.hpp"
#include "pexp/expansion.hpp"
#include "pexp/generate.hpp"
#include "pexp/instance.hpp"
#include "pexp/local_dist.hpp"
#include "pexp/ordering.hpp"
#include "pexp/orthogonalizer.hpp"
#include "pexp/pairwise.hpp"
#include "pexp/pseudo_expectation.hpp"
#include "pexp/psd.hpp"
#include "pexp/rational.hpp"
#include "pexp/report.hpp"
#include "pexp/soundness.hpp"
