#pragma once

#include "erapod/error.hpp"
#include "erapod/linalg.hpp"
#include "erapod/snapshots.hpp"
#include "erapod/lti.hpp"
#include "erapod/sampling.hpp"
#include "erapod/hankel.hpp"
#include "erapod/reduction.hpp"
#include "erapod/gramians.hpp"
#include "erapod/eval.hpp"
#include "erapod/io.hpp"
#include "erapod/experiment.hpp"
