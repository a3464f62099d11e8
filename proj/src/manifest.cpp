#include "attnslam/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "attnslam/error.hpp"

namespace attnslam {
namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError("manifest: missing key '" + std::string(key) + "' in " + where);
  return *it;
}

std::filesystem::path resolve(const std::string& p, const std::filesystem::path& base) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

SequenceManifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("manifest: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("manifest: top level must be an object");

  SequenceManifest m;
  try {
    m.sequence_name = require(doc, "sequence_name", "manifest").get<std::string>();
    m.layer_id = require(doc, "layer_id", "manifest").get<std::string>();
    const json& frames = require(doc, "frames", "manifest");
    if (!frames.is_array() || frames.empty()) {
      throw ValidationError("manifest: 'frames' must be a non-empty array");
    }

    std::set<std::uint64_t> seen_ids;
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const json& f = frames[i];
      const std::string where = "frames[" + std::to_string(i) + "]";
      if (!f.is_object()) throw ValidationError("manifest: " + where + " is not an object");

      const json& id = require(f, "frame_id", where);
      if (!id.is_number_integer() || id.get<std::int64_t>() < 0) {
        throw ValidationError("manifest: " + where + ".frame_id must be a non-negative integer");
      }
      FrameRecord rec;
      rec.frame_id = id.get<std::uint64_t>();
      rec.timestamp = require(f, "timestamp", where).get<double>();
      rec.activation_path = resolve(require(f, "activation_path", where).get<std::string>(), base_dir);
      rec.gradient_path = resolve(require(f, "gradient_path", where).get<std::string>(), base_dir);

      if (!seen_ids.insert(rec.frame_id).second) {
        throw ValidationError("manifest: duplicate frame_id " + std::to_string(rec.frame_id));
      }
      if (!m.frames.empty()) {
        const FrameRecord& prev = m.frames.back();
        if (rec.frame_id <= prev.frame_id) {
          throw ValidationError("manifest: frame_id " + std::to_string(rec.frame_id) +
                                " does not increase after " + std::to_string(prev.frame_id));
        }
        if (!(rec.timestamp > prev.timestamp)) {
          std::ostringstream msg;
          msg.precision(17);
          msg << "manifest: timestamps not strictly increasing at frame_id " << rec.frame_id
              << " (" << prev.timestamp << " then " << rec.timestamp << ")";
          throw ValidationError(msg.str());
        }
      }
      m.frames.push_back(std::move(rec));
    }
  } catch (const json::type_error& e) {
    throw ValidationError(std::string("manifest: wrong value type: ") + e.what());
  }
  return m;
}

SequenceManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str(), path.parent_path());
}

void write_manifest(const SequenceManifest& manifest, const std::filesystem::path& path) {
  nlohmann::ordered_json doc;
  doc["sequence_name"] = manifest.sequence_name;
  doc["layer_id"] = manifest.layer_id;
  doc["frames"] = nlohmann::ordered_json::array();
  for (const FrameRecord& f : manifest.frames) {
    nlohmann::ordered_json rec;
    rec["frame_id"] = f.frame_id;
    rec["timestamp"] = f.timestamp;
    rec["activation_path"] = f.activation_path.generic_string();
    rec["gradient_path"] = f.gradient_path.generic_string();
    doc["frames"].push_back(std::move(rec));
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace attnslam
