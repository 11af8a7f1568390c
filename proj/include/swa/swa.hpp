// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "swa/average.hpp"
#include "swa/config.hpp"
#include "swa/dataset.hpp"
#include "swa/error.hpp"
#include "swa/io.hpp"
#include "swa/landscape.hpp"
#include "swa/model.hpp"
#include "swa/rng.hpp"
#include "swa/schedules.hpp"
#include "swa/tensor_store.hpp"
#include "swa/trainer.hpp"
