#pragma once

#include "consensus_lab/errors.hpp"
#include "consensus_lab/labels.hpp"
#include "consensus_lab/sparse_matrix.hpp"
#include "consensus_lab/structure.hpp"
#include "consensus_lab/srw.hpp"
#include "consensus_lab/smat_io.hpp"
#include "consensus_lab/families.hpp"
#include "consensus_lab/perturbation.hpp"
#include "consensus_lab/stationary.hpp"
#include "consensus_lab/hitting.hpp"
#include "consensus_lab/mc_sim.hpp"
#include "consensus_lab/scan.hpp"
#include "consensus_lab/formats.hpp"
#include "consensus_lab/corpus.hpp"
#include "consensus_lab/verify.hpp"
