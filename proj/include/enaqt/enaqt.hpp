#pragma once

#include "enaqt/errors.hpp"
#include "enaqt/random.hpp"
#include "enaqt/linalg.hpp"
#include "enaqt/state.hpp"
#include "enaqt/grid.hpp"
#include "enaqt/parallel.hpp"
#include "enaqt/graph.hpp"
#include "enaqt/network.hpp"
#include "enaqt/pauli.hpp"
#include "enaqt/lindblad.hpp"
#include "enaqt/noise.hpp"
#include "enaqt/collision.hpp"
#include "enaqt/collision_circuit.hpp"
#include "enaqt/collision_algorithmic.hpp"

#define ENAQT_VERSION "0.1.0"
