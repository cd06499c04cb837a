#pragma once

#include "cmstein/bounds.hpp"
#include "cmstein/config.hpp"
#include "cmstein/degseq.hpp"
#include "cmstein/error.hpp"
#include "cmstein/explore.hpp"
#include "cmstein/mc.hpp"
#include "cmstein/rng.hpp"
#include "cmstein/stats.hpp"
#include "cmstein/stein.hpp"
