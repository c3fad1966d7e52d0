#pragma once

#include "boltshare/joint_model.hpp"
#include "boltshare/network.hpp"
#include "boltshare/mlp.hpp"
#include "boltshare/surrogate.hpp"
#include "boltshare/optimizer.hpp"
#include "boltshare/gauge.hpp"
#include "boltshare/io.hpp"
