#include <cmath>
#include <fstream>

#include <json.hpp>

#include "mcflab/arrival.hpp"

namespace mcf {

using nlohmann::json;

void write_field(const std::string& base_path, const ArrivalField& field) {
  std::ofstream bin(base_path + ".bin", std::ios::binary);
  if (!bin) throw Error("cannot write " + base_path + ".bin");
  bin.write(reinterpret_cast<const char*>(field.values().data()),
            static_cast<std::streamsize>(field.size() * sizeof(double)));

  json rle = json::array();
  const auto& mask = field.mask();
  for (std::size_t i = 0; i < mask.size();) {
    std::size_t j = i;
    while (j < mask.size() && mask[j] == mask[i]) ++j;
    rle.push_back({static_cast<int>(mask[i]), j - i});
    i = j;
  }
  json meta;
  meta["shape"] = field.shape();
  meta["spacing"] = field.h();
  meta["origin"] = std::vector<double>(field.origin().data(), field.origin().data() + field.dim());
  meta["order"] = "x fastest";
  meta["dtype"] = "float64 little endian";
  meta["mask_rle"] = rle;
  meta["mask_legend"] = {{"0", "outside"}, {"1", "swept"}, {"2", "extinct"}};
  const auto& st = field.stats;
  meta["extinction_time"] = st.extinction_time;
  meta["extinction_point"] =
      std::vector<double>(st.extinction_point.data(), st.extinction_point.data() + st.extinction_point.size());
  meta["steps"] = st.steps;
  meta["orphans"] = st.orphans;
  meta["unswept"] = st.unswept;
  meta["termination"] = st.termination;
  std::ofstream side(base_path + ".json");
  if (!side) throw Error("cannot write " + base_path + ".json");
  side << meta.dump(2) << '\n';
}

ArrivalField read_field(const std::string& base_path) {
  std::ifstream side(base_path + ".json");
  if (!side) throw Error("cannot read " + base_path + ".json");
  const json meta = json::parse(side);
  const auto shape = meta.at("shape").get<std::vector<int>>();
  const auto origin = meta.at("origin").get<std::vector<double>>();
  ArrivalField field(Eigen::Map<const VecX>(origin.data(), static_cast<Eigen::Index>(origin.size())),
                     meta.at("spacing").get<double>(), shape);

  std::vector<double> values(field.size());
  std::ifstream bin(base_path + ".bin", std::ios::binary);
  bin.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!bin) throw Error("field data in " + base_path + ".bin is truncated");

  std::size_t i = 0;
  for (const auto& run : meta.at("mask_rle")) {
    const auto s = static_cast<CellState>(run.at(0).get<int>());
    const auto count = run.at(1).get<std::size_t>();
    if (i + count > values.size()) throw Error("mask run-length encoding overruns the grid");
    for (std::size_t c = 0; c < count; ++c, ++i) field.set(i, values[i], s);
  }
  if (i != values.size()) throw Error("mask run-length encoding does not cover the grid");

  auto& st = field.stats;
  st.extinction_time = meta.value("extinction_time", 0.0);
  const auto ep = meta.value("extinction_point", std::vector<double>{});
  st.extinction_point = Eigen::Map<const VecX>(ep.data(), static_cast<Eigen::Index>(ep.size()));
  st.steps = meta.value("steps", std::size_t{0});
  st.orphans = meta.value("orphans", std::size_t{0});
  st.unswept = meta.value("unswept", std::size_t{0});
  st.termination = meta.value("termination", std::string{});
  return field;
}

}  // namespace mcf
