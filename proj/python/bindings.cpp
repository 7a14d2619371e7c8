#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "app.hpp"
#include "codeguard/diff.hpp"
#include "codeguard/embedding.hpp"
#include "codeguard/errors.hpp"
#include "codeguard/eval.hpp"
#include "codeguard/gateway.hpp"
#include "codeguard/hardener.hpp"
#include "codeguard/kb.hpp"
#include "codeguard/poison.hpp"

namespace py = pybind11;
using namespace codeguard;

namespace {

EmbeddingVector to_vector(const std::vector<double>& values) { return EmbeddingVector(values); }

std::vector<double> to_list(const EmbeddingVector& v) {
  return {v.values().begin(), v.values().end()};
}

py::dict entry_dict(const SecurityKnowledgeEntry& e) {
  py::dict d;
  d["id"] = e.id;
  d["source_vuln_id"] = e.source_vuln_id;
  d["cwe_id"] = e.cwe_id;
  d["language"] = e.language;
  d["functionality"] = e.functionality;
  d["root_cause_desc"] = e.root_cause_desc;
  d["root_cause_code"] = e.root_cause_code;
  d["fix_desc"] = e.fix_desc;
  d["fix_code"] = e.fix_code;
  return d;
}

py::dict harden_prompt(const std::string& query, const std::filesystem::path& base_path,
                       const std::filesystem::path& replay_script, int k_prime, int k,
                       bool decompose) {
  const auto base = load_base(base_path);
  ReplayBackend backend(ReplayScript::load(replay_script));
  HardenerConfig config;
  config.k_prime = k_prime;
  config.k = k;
  const HashingEmbedder embedder;
  const auto bundle = harden(query, base, config, backend, embedder, {}, HardenOptions{decompose});

  py::list sections;
  for (const auto& s : bundle.security_context.sections) {
    py::dict section;
    section["index"] = s.sub_task.index;
    section["description"] = s.sub_task.description;
    section["weight"] = s.aggregate_weight;
    std::vector<std::string> ids;
    for (const auto& e : s.retrieval.entries) ids.push_back(e.id);
    section["entry_ids"] = ids;
    sections.append(section);
  }
  py::dict out;
  out["prompt"] = assemble_prompt(bundle);
  out["sections"] = sections;
  out["entry_ids"] = bundle.security_context.entry_ids();
  return out;
}

std::vector<Finding> detect_with(const std::string& code, const std::string& language,
                                 const std::optional<std::filesystem::path>& rules) {
  return detect(code, language, rules ? RuleSet::load(*rules) : RuleSet::bundled());
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"codeguard"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = cli::run_app(static_cast<int>(argv.size()), argv.data(), out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Security hardening for retrieval-augmented code generation";

  auto base_error = py::register_exception<Error>(m, "CodeguardError", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", base_error);
  py::register_exception<ParseError>(m, "ParseError", base_error);
  py::register_exception<ConfigError>(m, "ConfigError", base_error);
  py::register_exception<IoError>(m, "IoError", base_error);

  py::class_<HashingEmbedder>(m, "HashingEmbedder")
      .def(py::init<std::uint64_t, std::size_t>(), py::arg("seed") = HashingEmbedder::kDefenderSeed,
           py::arg("dimension") = HashingEmbedder::kDimension)
      .def("embed", [](const HashingEmbedder& e, const std::string& text) { return to_list(e.embed(text)); })
      .def_property_readonly("dimension", &HashingEmbedder::dimension)
      .def_property_readonly("identifier", &HashingEmbedder::identifier)
      .def_readonly_static("DEFENDER_SEED", &HashingEmbedder::kDefenderSeed)
      .def_readonly_static("ATTACKER_SEED", &HashingEmbedder::kAttackerSeed);

  m.def("cosine", [](const std::vector<double>& a, const std::vector<double>& b) {
    return cosine(to_vector(a), to_vector(b));
  });

  py::class_<VectorIndex>(m, "VectorIndex")
      .def(py::init<std::size_t, std::string>(), py::arg("dimension"), py::arg("embedder_id") = "")
      .def("add", [](VectorIndex& index, std::string id, const std::vector<double>& values) {
        index.add(std::move(id), to_vector(values));
      })
      .def("top_k",
           [](const VectorIndex& index, const std::vector<double>& query, int k) {
             std::vector<std::pair<std::string, double>> out;
             for (const auto& s : top_k(to_vector(query), index, k)) out.emplace_back(s.id, s.score);
             return out;
           })
      .def("save", [](const VectorIndex& index, const std::filesystem::path& stem) { save_index(index, stem); })
      .def_static("load", &load_index)
      .def("__len__", &VectorIndex::size)
      .def_property_readonly("dimension", &VectorIndex::dimension)
      .def("__eq__", [](const VectorIndex& a, const VectorIndex& b) { return a == b; });

  py::class_<WeightTable>(m, "WeightTable")
      .def(py::init<double>(), py::arg("default_weight") = WeightTable::kDefaultWeight)
      .def_static("builtin", &WeightTable::builtin)
      .def("weight_for", &WeightTable::weight_for)
      .def("set", &WeightTable::set)
      .def("scaled", &WeightTable::scaled);

  py::class_<KnowledgeBase>(m, "KnowledgeBase")
      .def_static("load", &load_base)
      .def("__len__", &KnowledgeBase::size)
      .def("ids",
           [](const KnowledgeBase& kb) {
             std::vector<std::string> ids;
             for (const auto& e : kb.entries()) ids.push_back(e.id);
             return ids;
           })
      .def("entry", [](const KnowledgeBase& kb, const std::string& id) { return entry_dict(kb.find(id)); });

  m.def("harden", &harden_prompt, py::arg("query"), py::arg("base"), py::arg("replay_script"),
        py::arg("k_prime") = 2, py::arg("k") = 5, py::arg("decompose") = true,
        "Security-augmented prompt for a query, with the kept sub-task sections.");

  py::class_<Finding>(m, "Finding")
      .def_readonly("rule_id", &Finding::rule_id)
      .def_readonly("cwe_id", &Finding::cwe_id)
      .def_readonly("line", &Finding::line)
      .def_readonly("excerpt", &Finding::excerpt)
      .def("__repr__", [](const Finding& f) {
        return "<Finding " + f.rule_id + " " + f.cwe_id + " line " + std::to_string(f.line) + ">";
      });

  m.def("detect", &detect_with, py::arg("code"), py::arg("language"), py::arg("rules") = py::none());
  m.def("security_rate", &security_rate, py::arg("per_case"));
  m.def("similarity", &similarity, py::arg("candidate"), py::arg("reference"));
  m.def("compute_diff", &compute_diff, py::arg("vulnerable_code"), py::arg("fixed_code"));

  m.def("representative_count", &representative_count, py::arg("p_percent"), py::arg("corpus_size"));
  m.def(
      "select_representatives",
      [](const std::vector<std::vector<double>>& points, std::size_t count, std::uint64_t seed) {
        std::vector<EmbeddingVector> vectors;
        for (const auto& p : points) vectors.push_back(to_vector(p));
        return select_representatives(vectors, count, seed);
      },
      py::arg("points"), py::arg("count"), py::arg("seed") = 0);

  m.def("run_cli", &run_cli, py::arg("args"),
        "Runs the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
