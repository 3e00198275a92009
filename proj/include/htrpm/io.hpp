#pragma once

#include <map>
#include <string>
#include <vector>

#include "htrpm/dataset.hpp"
#include "htrpm/hyperparams.hpp"
#include "htrpm/simgen.hpp"
#include "htrpm/state.hpp"

namespace htrpm {

// Long-format data CSV. Header required:
//   participant_id,period,time,y,z1..zdz,x1..xdx
// z/x column counts are inferred from the header; x columns may be absent.
// participant_id and period are 1-based in the file. Read errors carry the
// offending line number. Doubles are written with 17 significant digits so a
// write/read cycle is lossless.
void write_data_csv(const std::string& path, const PanelDataset& data);
PanelDataset read_data_csv(const std::string& path);  // raw; caller validates

void write_truth_json(const std::string& path, const ScenarioTruth& truth);
ScenarioTruth read_truth_json(const std::string& path);

// Chain archive: gzip-compressed JSON lines. Line 1 is a metadata header;
// each following line is one retained draw. The gzip header is pinned
// (zero mtime) so identical archives are byte-identical files.
void write_archive(const std::string& path, const ChainArchive& archive);
ChainArchive read_archive(const std::string& path);

// Flat key=value config text; '#' and ';' start comments; blank lines
// ignored. Throws with the line number on a line lacking '='.
std::map<std::string, std::string> read_config_file(const std::string& path);

// Applies config-map entries onto hyperparameters. Recognized keys:
// variant, q, alpha, alpha0, aux_dishes, waic_fraction, iterations, burnin,
// thinning, seed, checkpoint_every. Unknown keys throw.
void apply_config(const std::map<std::string, std::string>& config,
                  Hyperparameters& hyper);

// FNV-1a hash (hex) of the run configuration and data dimensions; used to
// refuse resuming a checkpoint under a different configuration.
std::string config_fingerprint(const Hyperparameters& hyper, int n_participants,
                               int n_periods, int d_z, int d_x);

// Whole-file helpers (text mode, binary-exact).
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

// Deterministic gzip (fixed header, mtime = 0) and its inverse.
std::string gzip_compress(const std::string& raw);
std::string gzip_decompress(const std::string& compressed);

}  // namespace htrpm
