#include "modclass/outputs.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "modclass/errors.hpp"

namespace modclass {

std::string format_number(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.6g", v);
  std::string s(buf.data());
  if (s == "-0") s = "0";
  return s;
}

std::string trials_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "method,snr_db,modulation,trial,seed,decision,correct,entropy";
  for (const auto& name : result.pool_names) out << ",p_" << name;
  if (result.config.timing) out << ",wall_seconds";
  out << '\n';
  for (const auto& r : result.records) {
    out << result.variants[r.variant].label << ',' << format_number(r.snr_db) << ','
        << result.pool_names[r.truth] << ',' << r.trial << ',' << r.seed << ','
        << result.pool_names[r.decision] << ',' << (r.truth == r.decision ? 1 : 0) << ','
        << format_number(r.entropy);
    for (double p : r.p_a_mean) out << ',' << format_number(p);
    if (result.config.timing) out << ',' << format_number(r.wall_seconds);
    out << '\n';
  }
  return out.str();
}

std::string accuracy_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "snr_db,method,modulation,accuracy,trials\n";
  for (const auto& row : accuracy_table(result)) {
    out << format_number(row.snr_db) << ',' << row.method << ',' << row.modulation << ','
        << format_number(row.accuracy) << ',' << row.trials << '\n';
  }
  return out.str();
}

std::string confusion_csv(const ExperimentResult& result, int snr_index) {
  const int A = static_cast<int>(result.pool_names.size());
  std::ostringstream out;
  out << "method,actual";
  for (const auto& name : result.pool_names) out << ',' << name;
  out << '\n';
  for (int v = 0; v < static_cast<int>(result.variants.size()); ++v) {
    const auto cell = cell_records(result, v, snr_index);
    if (cell.empty()) continue;
    const auto cm = confusion_matrix(cell, A);
    for (int a = 0; a < A; ++a) {
      out << result.variants[v].label << ',' << result.pool_names[a];
      for (int b = 0; b < A; ++b) out << ',' << format_number(cm.at(a, b));
      out << '\n';
    }
  }
  return out.str();
}

std::string confusion_file_name(double snr_db) {
  return "confusion_" + format_number(snr_db) + ".csv";
}

namespace {

constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                              "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string accuracy_svg(const ExperimentResult& result) {
  constexpr double W = 640, H = 420, left = 60, right = 200, top = 30, bottom = 50;
  const double pw = W - left - right;
  const double ph = H - top - bottom;
  const auto& snrs = result.config.snr_db;
  double lo = *std::min_element(snrs.begin(), snrs.end());
  double hi = *std::max_element(snrs.begin(), snrs.end());
  if (hi == lo) {
    lo -= 1.0;
    hi += 1.0;
  }
  auto px = [&](double snr) { return left + (snr - lo) / (hi - lo) * pw; };
  auto py = [&](double acc) { return top + (1.0 - acc) * ph; };
  auto num = [](double v) { return format_number(v); };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(W) << "\" height=\"" << num(H)
      << "\" viewBox=\"0 0 " << num(W) << ' ' << num(H) << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << num(left) << "\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">"
      << xml_escape(result.config.name) << ": probability of correct classification</text>\n";

  for (int i = 0; i <= 5; ++i) {
    const double acc = i / 5.0;
    out << "<line x1=\"" << num(left) << "\" y1=\"" << num(py(acc)) << "\" x2=\"" << num(left + pw)
        << "\" y2=\"" << num(py(acc)) << "\" stroke=\"#dddddd\"/>\n"
        << "<text x=\"" << num(left - 8) << "\" y=\"" << num(py(acc) + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << num(acc)
        << "</text>\n";
  }
  for (double snr : snrs) {
    out << "<text x=\"" << num(px(snr)) << "\" y=\"" << num(top + ph + 16)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << num(snr)
        << "</text>\n";
  }
  out << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
      << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n"
      << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(H - 12)
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">SNR (dB)</text>\n";

  const auto rows = accuracy_table(result);
  for (std::size_t v = 0; v < result.variants.size(); ++v) {
    const auto& label = result.variants[v].label;
    const char* colour = kPalette[v % kPalette.size()];
    std::ostringstream points;
    std::ostringstream marks;
    for (const auto& row : rows) {
      if (row.method != label || row.modulation != "all") continue;
      points << num(px(row.snr_db)) << ',' << num(py(row.accuracy)) << ' ';
      marks << "<circle cx=\"" << num(px(row.snr_db)) << "\" cy=\"" << num(py(row.accuracy))
            << "\" r=\"3\" fill=\"" << colour << "\"/>\n";
    }
    std::string pts = points.str();
    if (!pts.empty()) pts.pop_back();
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\""
        << pts << "\"/>\n"
        << marks.str();
    const double ly = top + 14.0 + 18.0 * static_cast<double>(v);
    out << "<line x1=\"" << num(left + pw + 12) << "\" y1=\"" << num(ly) << "\" x2=\""
        << num(left + pw + 32) << "\" y2=\"" << num(ly) << "\" stroke=\"" << colour
        << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << num(left + pw + 38) << "\" y=\"" << num(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(label) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

void emit_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "trials.csv", trials_csv(result));
  write_file(dir / "accuracy_vs_snr.csv", accuracy_csv(result));
  for (int s = 0; s < static_cast<int>(result.config.snr_db.size()); ++s) {
    write_file(dir / confusion_file_name(result.config.snr_db[s]), confusion_csv(result, s));
  }
  write_file(dir / "accuracy_vs_snr.svg", accuracy_svg(result));
  write_file(dir / "config.cfg", serialize_config(result.config));
}

}  // namespace modclass
