#pragma once

#include "d2scalar.hpp"
#include "kernels.hpp"
#include "cgp.hpp"
#include "dataset.hpp"
#include "loss.hpp"
#include "momes.hpp"
#include "serialization.hpp"
#include "config.hpp"
