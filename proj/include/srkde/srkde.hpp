#pragma once

#include "srkde/classifier.hpp"
#include "srkde/csv.hpp"
#include "srkde/dataset.hpp"
#include "srkde/estimator.hpp"
#include "srkde/experiment.hpp"
#include "srkde/kdtree.hpp"
#include "srkde/kernel.hpp"
#include "srkde/mixture.hpp"
#include "srkde/report.hpp"
#include "srkde/rng.hpp"
#include "srkde/special_math.hpp"
#include "srkde/version.hpp"
