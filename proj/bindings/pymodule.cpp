#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vptt/benchgen.hpp"
#include "vptt/embedding.hpp"
#include "vptt/judge.hpp"
#include "vptt/persona.hpp"
#include "vptt/score.hpp"
#include "vptt/stats.hpp"
#include "vptt/vprag.hpp"

namespace py = pybind11;

namespace {

vptt::vprag::retrieval_config make_retrieval_config(double tau, std::size_t word_budget,
                                                    std::size_t per_category) {
    auto cfg = vptt::vprag::retrieval_config::defaults(per_category);
    cfg.tau = tau;
    cfg.word_budget = word_budget;
    return cfg;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "visual-prior prompt personalization core";

    py::register_exception<vptt::error>(m, "VpttError");

    py::class_<vptt::persona>(m, "Persona")
        .def_property_readonly("id", [](const vptt::persona& p) { return p.id; })
        .def_property_readonly("demographics",
                               [](const vptt::persona& p) { return p.demographics; })
        .def_property_readonly("post_count",
                               [](const vptt::persona& p) { return p.posts.size(); })
        .def_property_readonly("captions",
                               [](const vptt::persona& p) {
                                   std::vector<std::string> out;
                                   for (const auto& ps : p.posts) out.push_back(ps.caption);
                                   return out;
                               })
        .def("summary", [](const vptt::persona& p) { return vptt::persona_summary(p); });

    m.def("attention_weights", &vptt::vprag::attention_weights, py::arg("similarities"),
          py::arg("tau") = 0.1);
    m.def("retrieval_entropy", &vptt::vprag::retrieval_entropy, py::arg("weights"),
          py::arg("tol") = 1e-6);
    m.def("effective_posts", &vptt::vprag::effective_posts, py::arg("weights"),
          py::arg("tol") = 1e-6);
    m.def("select_posts", &vptt::vprag::select_posts, py::arg("weights"), py::arg("n_eff"),
          py::arg("total_budget"));
    m.def("allocate_quotas", &vptt::vprag::allocate_quotas, py::arg("weights"),
          py::arg("available"), py::arg("budget"));

    m.def(
        "compose_prompt",
        [](const std::string& query, const std::string& summary,
           const std::vector<std::string>& elements, std::size_t word_budget,
           bool include_summary) {
            auto out =
                vptt::vprag::compose_prompt(query, summary, elements, word_budget, include_summary);
            py::dict d;
            d["text"] = out.text;
            d["included_elements"] = out.included_elements;
            d["summary_included"] = out.summary_included;
            return d;
        },
        py::arg("query"), py::arg("summary"), py::arg("elements"), py::arg("word_budget") = 150,
        py::arg("include_summary") = true);

    m.def(
        "scaffold_persona",
        [](std::uint64_t i, std::uint64_t seed, std::size_t posts) {
            vptt::benchgen::scaffold_config cfg;
            cfg.rng_seed = seed;
            cfg.post_count = posts;
            return vptt::benchgen::scaffold_persona(i, cfg);
        },
        py::arg("i"), py::arg("seed") = 42, py::arg("posts") = 30);

    m.def(
        "personalize",
        [](const vptt::persona& p, const std::string& query, double tau,
           std::size_t word_budget, std::size_t per_category, std::size_t dim) {
            vptt::embed::local_embedder post_embedder(dim, 0);
            vptt::embed::local_embedder element_embedder(dim, 1);
            auto result = vptt::vprag::personalize(
                query, p, make_retrieval_config(tau, word_budget, per_category), post_embedder,
                element_embedder);
            py::dict d;
            d["text"] = result.text;
            d["entropy"] = result.trace.entropy;
            d["n_eff"] = result.trace.n_eff;
            d["selected_posts"] = result.trace.selected_posts;
            d["elements"] = result.elements;
            d["summary_included"] = result.summary_included;
            return d;
        },
        py::arg("persona"), py::arg("query"), py::arg("tau") = 0.1,
        py::arg("word_budget") = 150, py::arg("per_category") = 3, py::arg("dim") = 256);

    m.def(
        "score_prompt",
        [](const vptt::persona& p, const std::string& query, const std::string& text,
           std::size_t dim) {
            vptt::embed::local_embedder post_embedder(dim, 0);
            vptt::embed::local_embedder element_embedder(dim, 1);
            vptt::score::score_options opts;
            auto ctx = vptt::score::make_score_context(p, query, post_embedder, opts);
            auto c = vptt::score::score_prompt(text, ctx, post_embedder, element_embedder, opts);
            py::dict d;
            d["pa"] = c.pa;
            d["gs"] = c.gs;
            d["cp"] = c.cp;
            d["nv"] = c.nv;
            d["combined"] = c.combined();
            d["constrained"] = c.constrained();
            return d;
        },
        py::arg("persona"), py::arg("query"), py::arg("text"), py::arg("dim") = 256);

    m.def("novelty", &vptt::score::novelty, py::arg("prompt"), py::arg("captions"));

    m.def("spearman_rho", &vptt::stats::spearman_rho, py::arg("a"), py::arg("b"));
    m.def("kendalls_w", &vptt::stats::kendalls_w, py::arg("rankings"));
    m.def("cohens_d", &vptt::stats::cohens_d, py::arg("x"), py::arg("y"));

    m.def(
        "blind_shuffle",
        [](const std::vector<std::string>& methods, const std::string& user_id,
           std::uint64_t seed) {
            auto a = vptt::judge::blind_shuffle(methods, user_id, seed);
            py::dict d;
            d["labels"] = a.labels;
            d["methods"] = a.methods;
            return d;
        },
        py::arg("methods"), py::arg("user_id"), py::arg("seed") = 0);

    m.def("normalize_likert", &vptt::judge::normalize_likert, py::arg("score"));

    m.def(
        "seed_index",
        [](std::uint64_t i, std::uint64_t universe) {
            return vptt::benchgen::seed_index(i, universe);
        },
        py::arg("i"), py::arg("universe") = 200000);
    m.def("face_seed", &vptt::benchgen::face_seed, py::arg("user_id"), py::arg("age"));
    m.def(
        "combination_count",
        []() {
            return vptt::benchgen::combination_count(vptt::benchgen::attribute_space::defaults());
        },
        "exact size of the default facial attribute space, as a decimal string");
}
