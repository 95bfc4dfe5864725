#pragma once

// Umbrella header: the domain algebra, its crossbar materialization, the
// behavioral device model, the execution engine, and the validation suite.

#include "quadbar/algebra.hpp"
#include "quadbar/device.hpp"
#include "quadbar/domain.hpp"
#include "quadbar/engine.hpp"
#include "quadbar/experiments.hpp"
#include "quadbar/fixtures.hpp"
#include "quadbar/homomorphism.hpp"
#include "quadbar/kb_io.hpp"
#include "quadbar/materializer.hpp"
#include "quadbar/rng.hpp"
#include "quadbar/stats.hpp"
#include "quadbar/topology.hpp"
#include "quadbar/truth.hpp"
#include "quadbar/version.hpp"
