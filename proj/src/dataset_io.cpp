#include "radt/dataset_io.hpp"

#include <fstream>

#include "json.hpp"

namespace radt {

using nlohmann::json;

namespace {

json header_to_json(const DatasetHeader& h) {
  json j{{"version", h.version}, {"d_s", h.d_s}, {"d_a", h.d_a}, {"env", h.env}};
  if (!h.tool_version.empty()) j["tool_version"] = h.tool_version;
  if (!h.config_hash.empty()) j["config_hash"] = h.config_hash;
  j["seed"] = h.seed;
  return j;
}

DatasetHeader header_from_json(const json& j, int line) {
  if (!j.contains("version") || !j.contains("d_s") || !j.contains("d_a"))
    throw ParseError("dataset header missing version/d_s/d_a", line);
  DatasetHeader h;
  h.version = j.at("version").get<int>();
  if (h.version != 1)
    throw SchemaError("unsupported dataset version " + std::to_string(h.version));
  h.d_s = j.at("d_s").get<int>();
  h.d_a = j.at("d_a").get<int>();
  h.env = j.value("env", std::string{});
  h.tool_version = j.value("tool_version", std::string{});
  h.config_hash = j.value("config_hash", std::string{});
  h.seed = j.value("seed", std::uint64_t{0});
  return h;
}

json traj_fields(const Trajectory& t) {
  json j;
  j["states"] = t.states;
  j["actions"] = t.actions;
  j["seed"] = t.meta.seed;
  return j;
}

void check_dims(const Trajectory& t, const DatasetHeader& h, int line) {
  if (t.states.size() != t.actions.size() || t.states.empty())
    throw ParseError("trajectory must have equal, nonzero state/action counts", line);
  for (const auto& s : t.states)
    if (static_cast<int>(s.size()) != h.d_s)
      throw SchemaError("state dimension " + std::to_string(s.size()) +
                        " does not match header d_s " + std::to_string(h.d_s) +
                        " at line " + std::to_string(line));
  for (const auto& a : t.actions)
    if (static_cast<int>(a.size()) != h.d_a)
      throw SchemaError("action dimension " + std::to_string(a.size()) +
                        " does not match header d_a " + std::to_string(h.d_a) +
                        " at line " + std::to_string(line));
}

Trajectory traj_from_json(const json& j, const std::string& env_id, int line) {
  if (!j.contains("states") || !j.contains("actions"))
    throw ParseError("record missing states/actions", line);
  Trajectory t;
  t.states = j.at("states").get<std::vector<StateVec>>();
  t.actions = j.at("actions").get<std::vector<ActionVec>>();
  t.meta.seed = j.value("seed", std::uint64_t{0});
  t.meta.env_id = env_id;
  return t;
}

json labeled_to_json(const LabeledTrajectory& lt, std::size_t pair_id,
                     const char* role) {
  json j = traj_fields(lt.trajectory);
  json boxes = json::array();
  for (const auto& b : lt.prompt.avoid_boxes)
    boxes.push_back({{"lower", b.lower}, {"upper", b.upper}});
  j["prompt"] = {{"z", lt.prompt.z},
                 {"boxes", std::move(boxes)},
                 {"goal", lt.prompt.goal}};
  j["per_step_ok"] = lt.per_step_ok;
  j["pair_id"] = pair_id;
  j["pair_role"] = role;
  return j;
}

LabeledTrajectory labeled_from_json(const json& j, const DatasetHeader& h, int line) {
  LabeledTrajectory lt;
  lt.trajectory = traj_from_json(j, h.env, line);
  check_dims(lt.trajectory, h, line);
  if (!j.contains("prompt")) throw ParseError("record missing prompt", line);
  const json& p = j.at("prompt");
  lt.prompt.z = p.at("z").get<int>();
  if (lt.prompt.z != 0 && lt.prompt.z != 1)
    throw SchemaError("prompt z must be 0 or 1 at line " + std::to_string(line));
  for (const auto& bj : p.at("boxes")) {
    AvoidBox b;
    b.lower = bj.at("lower").get<std::vector<double>>();
    b.upper = bj.at("upper").get<std::vector<double>>();
    if (b.lower.size() != b.upper.size() ||
        static_cast<int>(b.lower.size()) != h.d_s)
      throw SchemaError("avoid box dimension mismatch at line " +
                        std::to_string(line));
    lt.prompt.avoid_boxes.push_back(std::move(b));
  }
  lt.prompt.goal = p.at("goal").get<StateVec>();
  if (static_cast<int>(lt.prompt.goal.size()) != h.d_s)
    throw SchemaError("goal dimension mismatch at line " + std::to_string(line));
  lt.per_step_ok = j.at("per_step_ok").get<std::vector<std::uint8_t>>();
  if (lt.per_step_ok.size() != lt.trajectory.length())
    throw SchemaError("per_step_ok length mismatch at line " + std::to_string(line));
  return lt;
}

json parse_line(const std::string& line, int line_no) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded()) throw ParseError("malformed JSON record", line_no);
  return j;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open for reading: " + path);
  return in;
}

}  // namespace

std::vector<const LabeledTrajectory*> PairedDatasetFile::entries() const {
  std::vector<const LabeledTrajectory*> out;
  out.reserve(data.pairs.size() * 2);
  for (const auto& p : data.pairs) {
    out.push_back(&p.orig);
    out.push_back(&p.copy);
  }
  return out;
}

void write_raw_dataset(const std::string& path, const RawDataset& ds) {
  auto out = open_out(path);
  out << header_to_json(ds.header).dump() << '\n';
  for (const auto& t : ds.trajectories) out << traj_fields(t).dump() << '\n';
}

RawDataset read_raw_dataset(const std::string& path) {
  auto in = open_in(path);
  RawDataset ds;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = parse_line(line, line_no);
    if (line_no == 1) {
      ds.header = header_from_json(j, line_no);
      continue;
    }
    Trajectory t = traj_from_json(j, ds.header.env, line_no);
    check_dims(t, ds.header, line_no);
    ds.trajectories.push_back(std::move(t));
  }
  if (line_no == 0) throw ParseError("empty dataset file: " + path, 1);
  return ds;
}

void write_paired_dataset(const std::string& path, const PairedDatasetFile& ds) {
  auto out = open_out(path);
  out << header_to_json(ds.header).dump() << '\n';
  for (std::size_t i = 0; i < ds.data.pairs.size(); ++i) {
    out << labeled_to_json(ds.data.pairs[i].orig, i, "orig").dump() << '\n';
    out << labeled_to_json(ds.data.pairs[i].copy, i, "copy").dump() << '\n';
  }
}

PairedDatasetFile read_paired_dataset(const std::string& path) {
  auto in = open_in(path);
  PairedDatasetFile ds;
  std::string line;
  int line_no = 0;
  std::vector<std::optional<LabeledTrajectory>> origs, copies;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = parse_line(line, line_no);
    if (line_no == 1) {
      ds.header = header_from_json(j, line_no);
      continue;
    }
    LabeledTrajectory lt = labeled_from_json(j, ds.header, line_no);
    if (!j.contains("pair_id") || !j.contains("pair_role"))
      throw ParseError("paired record missing pair_id/pair_role", line_no);
    auto pair_id = j.at("pair_id").get<std::size_t>();
    auto role = j.at("pair_role").get<std::string>();
    auto& side = (role == "orig") ? origs : copies;
    if (role != "orig" && role != "copy")
      throw ParseError("pair_role must be \"orig\" or \"copy\"", line_no);
    if (side.size() <= pair_id) side.resize(pair_id + 1);
    if (side[pair_id].has_value())
      throw ParseError("duplicate " + role + " for pair " + std::to_string(pair_id),
                       line_no);
    side[pair_id] = std::move(lt);
  }
  if (line_no == 0) throw ParseError("empty dataset file: " + path, 1);
  if (origs.size() != copies.size())
    throw SchemaError("unequal orig/copy record counts in " + path);
  ds.data.pairs.reserve(origs.size());
  for (std::size_t i = 0; i < origs.size(); ++i) {
    if (!origs[i] || !copies[i])
      throw SchemaError("incomplete pair " + std::to_string(i) + " in " + path);
    ds.data.pairs.push_back({std::move(*origs[i]), std::move(*copies[i])});
  }
  return ds;
}

}  // namespace radt
