#pragma once

#include <filesystem>
#include <string>

#include "modclass/harness.hpp"

namespace modclass {

/// Six significant digits, '.' decimal separator.
std::string format_number(double v);

/// One row per record: method, snr_db, modulation, trial, seed, decision,
/// correct, entropy, one p_<name> column per pool entry (and wall_seconds
/// when config.timing is set).
std::string trials_csv(const ExperimentResult& result);
/// snr_db, method, modulation, accuracy, trials.
std::string accuracy_csv(const ExperimentResult& result);
/// method, actual, then one column per estimated modulation.
std::string confusion_csv(const ExperimentResult& result, int snr_index);
/// Overall accuracy versus SNR, one polyline per variant.
std::string accuracy_svg(const ExperimentResult& result);

/// File name of the confusion matrix at SNR point snr_index, e.g. confusion_5.csv.
std::string confusion_file_name(double snr_db);

/// Writes trials.csv, accuracy_vs_snr.csv, confusion_<snr>.csv per SNR point,
/// accuracy_vs_snr.svg and config.cfg into dir (created if missing).
/// Throws IoError when a file cannot be written.
void emit_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

}  // namespace modclass
