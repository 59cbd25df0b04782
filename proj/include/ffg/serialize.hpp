#pragma once

// JSON and CSV emission. Configurations serialize as the documented array of
// {location, spin, mult} records in lexicographic order; doubles print via
// the shortest-round-trip formatter of the JSON library, so byte-identical
// artifacts follow from identical runs.

#include <fstream>
#include <string>

#include <json.hpp>

#include "ffg/ffg.hpp"
#include "ffg/oracle.hpp"
#include "ffg/space.hpp"

namespace ffg {

using Json = nlohmann::ordered_json;

inline Json location_to_json(const Location& l) {
  Json a = Json::array();
  for (int i = 0; i < l.dim; ++i) {
    if (l.kind == SpaceKind::lattice)
      a.push_back(static_cast<long>(l.x[i]));
    else
      a.push_back(l.x[i]);
  }
  return a;
}

inline std::string spin_to_string(const Spin& s) {
  switch (s.kind) {
    case SpinKind::tag: return std::to_string(s.tag);
    case SpinKind::angle: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "a%.17g", s.angle);
      return buf;
    }
    case SpinKind::shape: return "s" + std::to_string(s.tag);
  }
  return "?";
}

inline Json config_to_json(const ParticleConfiguration& cfg) {
  Json arr = Json::array();
  for (auto& [p, mult] : cfg.entries()) {
    Json rec;
    rec["location"] = location_to_json(p.loc);
    rec["lattice"] = p.loc.kind == SpaceKind::lattice;
    rec["spin"] = spin_to_string(p.spin);
    rec["mult"] = mult;
    arr.push_back(rec);
  }
  return arr;
}

inline Spin spin_from_string(const std::string& s) {
  if (!s.empty() && s[0] == 'a') return Spin::make_angle(std::stod(s.substr(1)));
  if (!s.empty() && s[0] == 's') return Spin::make_shape(std::stoll(s.substr(1)));
  return Spin::make_tag(std::stoll(s));
}

inline ParticleConfiguration config_from_json(const Json& arr) {
  ParticleConfiguration out;
  for (const Json& rec : arr) {
    bool lattice = rec.value("lattice", false);
    Location loc;
    if (lattice) {
      std::vector<long> cs;
      for (const Json& v : rec.at("location")) cs.push_back(v.get<long>());
      loc = Location::lattice(cs);
    } else {
      std::vector<double> cs;
      for (const Json& v : rec.at("location")) cs.push_back(v.get<double>());
      loc = Location::continuum(cs);
    }
    out.add(Particle{loc, spin_from_string(rec.at("spin").get<std::string>())},
            rec.value("mult", 1));
  }
  return out;
}

inline Json clan_to_json(const DilutedModel& m, const Clan& clan, const ThinResult* thin) {
  Json j;
  Json cyls = Json::array();
  for (const Cylinder& c : clan.cylinders) {
    Json rec;
    rec["id"] = c.id;
    rec["generation"] = c.generation;
    rec["root"] = c.root_index;
    rec["location"] = location_to_json(c.basis.loc);
    rec["spin"] = spin_to_string(c.basis.spin);
    rec["birth"] = c.birth;
    rec["lifespan"] = c.lifespan;
    rec["flag"] = c.flag;
    if (thin) rec["kept"] = static_cast<bool>(thin->kept[c.id]);
    cyls.push_back(rec);
  }
  j["cylinders"] = cyls;
  Json arcs = Json::array();
  for (auto [a, d] : clan_arcs(m, clan)) arcs.push_back(Json::array({a, d}));
  j["arcs"] = arcs;
  Json gens = Json::array();
  for (std::size_t g = 0; g < clan.generations(); ++g) gens.push_back(clan.generation_size(g));
  j["generation_sizes"] = gens;
  return j;
}

inline Json distribution_to_json(const ExactDistribution& d) {
  Json j;
  j["partition_value"] = d.z;
  Json atoms = Json::array();
  for (auto& [cfg, p] : d.atoms) {
    Json rec;
    rec["configuration"] = config_to_json(cfg);
    rec["probability"] = p;
    atoms.push_back(rec);
  }
  j["atoms"] = atoms;
  return j;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(errc::config_error, "cannot write " + path);
  out << text;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// rows of already-formatted cells
inline std::string csv_table(const std::vector<std::string>& header,
                             const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    out += header[i];
    out += (i + 1 == header.size()) ? '\n' : ',';
  }
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out += row[i];
      out += (i + 1 == row.size()) ? '\n' : ',';
    }
  }
  return out;
}

}  // namespace ffg
