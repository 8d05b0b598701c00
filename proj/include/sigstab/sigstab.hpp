#pragma once

#include "sigstab/agcn.hpp"
#include "sigstab/error.hpp"
#include "sigstab/graph.hpp"
#include "sigstab/matrix.hpp"
#include "sigstab/model_io.hpp"
#include "sigstab/motifs.hpp"
#include "sigstab/ranking.hpp"
#include "sigstab/report.hpp"
#include "sigstab/spectral.hpp"
#include "sigstab/walks.hpp"
