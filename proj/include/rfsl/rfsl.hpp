#pragma once

#include "rfsl/bounds.hpp"
#include "rfsl/config.hpp"
#include "rfsl/countnet.hpp"
#include "rfsl/dataset_gen.hpp"
#include "rfsl/diffraction.hpp"
#include "rfsl/error.hpp"
#include "rfsl/geometry.hpp"
#include "rfsl/io.hpp"
#include "rfsl/matrix.hpp"
#include "rfsl/multibody.hpp"
#include "rfsl/network.hpp"
#include "rfsl/parallel.hpp"
#include "rfsl/rng.hpp"
#include "rfsl/scene.hpp"
