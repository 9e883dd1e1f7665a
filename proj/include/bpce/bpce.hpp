#pragma once

// Umbrella header for the whole library.

#include "bpce/change_ops.hpp"
#include "bpce/clean.hpp"
#include "bpce/cluster.hpp"
#include "bpce/diff.hpp"
#include "bpce/epml_io.hpp"
#include "bpce/errors.hpp"
#include "bpce/generator.hpp"
#include "bpce/graph.hpp"
#include "bpce/isomorphism.hpp"
#include "bpce/json_io.hpp"
#include "bpce/mappings.hpp"
#include "bpce/merge.hpp"
#include "bpce/project.hpp"
#include "bpce/propagate.hpp"
#include "bpce/similarity.hpp"
#include "bpce/well_formed.hpp"
