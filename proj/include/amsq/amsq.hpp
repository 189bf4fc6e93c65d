// Copyright 2026 The amsq Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "amsq/analysis.hpp"
#include "amsq/container.hpp"
#include "amsq/format.hpp"
#include "amsq/half.hpp"
#include "amsq/kernels.hpp"
#include "amsq/matrix.hpp"
#include "amsq/npy.hpp"
#include "amsq/packing.hpp"
#include "amsq/quantize.hpp"
#include "amsq/scheme.hpp"
