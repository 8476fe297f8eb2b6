#pragma once

#include "shtauc/dataset.hpp"
#include "shtauc/errors.hpp"
#include "shtauc/libsvm.hpp"
#include "shtauc/metrics.hpp"
#include "shtauc/objective.hpp"
#include "shtauc/optimizer.hpp"
#include "shtauc/rng.hpp"
#include "shtauc/splits.hpp"
#include "shtauc/synthetic.hpp"
#include "shtauc/theory.hpp"
#include "shtauc/vector_ops.hpp"
