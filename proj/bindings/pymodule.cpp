#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "defadv/bayes.hpp"
#include "defadv/io.hpp"
#include "defadv/losses.hpp"
#include "defadv/synth.hpp"
#include "defadv/train.hpp"

namespace py = pybind11;
using namespace defadv;

namespace {

CostTable table_from_rows(const std::vector<std::vector<double>>& rows,
                          std::optional<double> bound) {
  return CostTable::from_rows(rows, bound);
}

}  // namespace

PYBIND11_MODULE(_defadv, m) {
  m.doc() = "learning-to-defer with expert-conditioned advice acquisition";

  py::register_exception<ValidationError>(m, "ValidationError",
                                          PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::class_<ActionSpace>(m, "ActionSpace")
      .def(py::init([](int num_experts, int num_advice) {
             ActionSpace s{num_experts, num_advice};
             s.validate();
             return s;
           }),
           py::arg("num_experts"), py::arg("num_advice"))
      .def_readonly("num_experts", &ActionSpace::num_experts)
      .def_readonly("num_advice", &ActionSpace::num_advice)
      .def_property_readonly("num_actions", &ActionSpace::num_actions)
      .def("__repr__", [](const ActionSpace& s) {
        return "ActionSpace(J=" + std::to_string(s.num_experts) +
               ", K=" + std::to_string(s.num_advice) + ")";
      });

  py::class_<Action>(m, "Action")
      .def(py::init<int, int>(), py::arg("expert"), py::arg("advice"))
      .def_readonly("expert", &Action::expert)
      .def_readonly("advice", &Action::advice)
      .def("__eq__", [](const Action& a, const Action& b) { return a == b; })
      .def("__repr__", [](const Action& a) {
        return "Action(expert=" + std::to_string(a.expert) +
               ", advice=" + std::to_string(a.advice) + ")";
      });

  py::class_<CostTable>(m, "CostTable")
      .def(py::init(&table_from_rows), py::arg("rows"),
           py::arg("bound") = std::nullopt)
      .def_property_readonly("space", &CostTable::space)
      .def_property_readonly("bound", &CostTable::bound)
      .def("at", &CostTable::at, py::arg("expert"), py::arg("advice"))
      .def("entries", [](const CostTable& t) {
        return std::vector<double>(t.entries().begin(), t.entries().end());
      });

  m.def("flatten", &flatten, py::arg("action"), py::arg("space"));
  m.def("unflatten", &unflatten, py::arg("index"), py::arg("space"));
  m.def("true_loss", &true_loss, py::arg("action"), py::arg("table"));
  m.def(
      "mask_advice",
      [](const std::vector<std::string>& full, int k) {
        const MaskedAdvice masked = mask_advice(full, k);
        std::vector<std::optional<std::string>> out(masked.slots.begin(),
                                                    masked.slots.end());
        return out;
      },
      py::arg("full_advice"), py::arg("k"));
  m.def(
      "assemble_cost_table",
      [](const std::vector<std::vector<double>>& task_loss,
         const std::vector<double>& expert_fees,
         const std::vector<double>& advice_fees, double cost_multiplier) {
        CostComponents c;
        c.task_loss = task_loss;
        c.expert_fees = expert_fees;
        c.advice_fees = advice_fees;
        c.cost_multiplier = cost_multiplier;
        return assemble_cost_table(c);
      },
      py::arg("task_loss"), py::arg("expert_fees"), py::arg("advice_fees"),
      py::arg("cost_multiplier") = 1.0);

  py::class_<BayesDecision>(m, "BayesDecision")
      .def_readonly("router", &BayesDecision::router)
      .def_readonly("query", &BayesDecision::query)
      .def_readonly("executed", &BayesDecision::executed)
      .def_readonly("risk", &BayesDecision::risk);

  m.def("bayes_query", &bayes_query, py::arg("table"), py::arg("expert"));
  m.def("bayes_policy", &bayes_policy, py::arg("table"));
  m.def(
      "advice_worth",
      [](const std::vector<double>& task_losses,
         const std::vector<double>& advice_fees) {
        const AdviceWorth w = advice_worth(task_losses, advice_fees);
        return py::make_tuple(w.worth, w.best_advice);
      },
      py::arg("task_losses"), py::arg("advice_fees"));
  m.def(
      "dominance_check",
      [](const CostTable& t) {
        const DominanceGap g = dominance_check(t);
        return py::make_tuple(g.risk_with_advice, g.risk_no_advice);
      },
      py::arg("table"));

  py::class_<MismatchDecomposition>(m, "MismatchDecomposition")
      .def_readonly("max_cost", &MismatchDecomposition::max_cost)
      .def_readonly("offset", &MismatchDecomposition::offset)
      .def_readonly("weights", &MismatchDecomposition::weights)
      .def("weight_mass", &MismatchDecomposition::weight_mass)
      .def("reconstruct", &MismatchDecomposition::reconstruct);
  m.def("mismatch_decompose", &mismatch_decompose, py::arg("table"));

  m.def(
      "weighted_reduction",
      [](const std::vector<double>& weights, double offset) {
        const WeightedReduction r = weighted_reduction(weights, offset);
        return py::make_tuple(r.weight_mass, r.label_distribution, r.offset);
      },
      py::arg("mean_weights"), py::arg("mean_offset") = 0.0);

  m.def(
      "comp_sum",
      [](const std::vector<double>& scores, int label, double tau) {
        const LossValueGrad r = comp_sum(scores, label, tau);
        return py::make_tuple(r.value, r.grad);
      },
      py::arg("scores"), py::arg("label"), py::arg("tau"));
  m.def(
      "augmented_surrogate",
      [](const std::vector<double>& scores, const std::vector<double>& weights,
         double tau) {
        const LossValueGrad r = augmented_surrogate(scores, weights, tau);
        return py::make_tuple(r.value, r.grad);
      },
      py::arg("scores"), py::arg("weights"), py::arg("tau"));

  py::class_<SeparatedScores>(m, "SeparatedScores")
      .def(py::init<double, double, double>(), py::arg("router"),
           py::arg("query_1"), py::arg("query_2"))
      .def_readonly("router", &SeparatedScores::router)
      .def_readonly("query_1", &SeparatedScores::query_1)
      .def_readonly("query_2", &SeparatedScores::query_2);
  m.def(
      "separated_surrogate",
      [](const SeparatedScores& s, const CostTable& t) {
        const SeparatedValueGrad r = separated_surrogate(s, t);
        return py::make_tuple(
            r.value, std::vector<double>{r.d_router, r.d_query_1, r.d_query_2});
      },
      py::arg("scores"), py::arg("table"));

  m.def(
      "profiled_summary",
      [](double u, double v, bool cross_check) {
        const ProfiledSummary s = profiled_summary(u, v, cross_check);
        return py::make_tuple(s.value, s.minimizer);
      },
      py::arg("u"), py::arg("v"), py::arg("cross_check") = false);
  m.def("router_minimizer", &router_minimizer, py::arg("a"), py::arg("b"));
  m.def("transfer_gamma", &transfer_gamma, py::arg("u"), py::arg("tau"),
        py::arg("cardinality"));
  m.def("transfer_gamma_tilde", &transfer_gamma_tilde, py::arg("u"),
        py::arg("tau"), py::arg("cardinality"), py::arg("weight_mass"));

  py::class_<FisherCertificate>(m, "FisherCertificate")
      .def_readonly("delta", &FisherCertificate::delta)
      .def_readonly("table", &FisherCertificate::table)
      .def_readonly("summary_top", &FisherCertificate::summary_top)
      .def_readonly("summary_bottom", &FisherCertificate::summary_bottom)
      .def_readonly("router_score", &FisherCertificate::router_score)
      .def_readonly("bayes", &FisherCertificate::bayes)
      .def_readonly("surrogate_action", &FisherCertificate::surrogate_action);
  m.def("fisher_counterexample", &fisher_counterexample, py::arg("b"),
        py::arg("eps"), py::arg("bound_c"),
        py::arg("delta") = std::optional<double>{});

  py::enum_<Method>(m, "Method")
      .value("augmented", Method::augmented)
      .value("l2d", Method::l2d)
      .value("separated", Method::separated);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("weight_decay", &TrainConfig::weight_decay)
      .def_readwrite("grad_clip_norm", &TrainConfig::grad_clip_norm)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("tau", &TrainConfig::tau)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("hidden_dims", &TrainConfig::hidden_dims);

  py::class_<RegionSpec>(m, "RegionSpec")
      .def_static("defaults", &RegionSpec::defaults)
      .def_readwrite("table_minus", &RegionSpec::table_minus)
      .def_readwrite("table_plus", &RegionSpec::table_plus)
      .def_readwrite("advice_fee", &RegionSpec::advice_fee)
      .def("validate", &RegionSpec::validate);

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("space", &Dataset::space)
      .def_readonly("num_instances", &Dataset::num_instances)
      .def_readonly("feature_dim", &Dataset::feature_dim)
      .def_readonly("region_tags", &Dataset::region_tags);

  m.def("generate_synthetic", &generate_synthetic, py::arg("n"),
        py::arg("seed"), py::arg("spec"));
  m.def(
      "bayes_reference",
      [](const RegionSpec& spec) {
        const BayesReference r = bayes_reference(spec);
        return py::make_tuple(r.risk, r.action_minus, r.action_plus);
      },
      py::arg("spec"));

  py::class_<EvalMetrics>(m, "EvalMetrics")
      .def_readonly("risk", &EvalMetrics::risk)
      .def_readonly("excess", &EvalMetrics::excess)
      .def_readonly("advice_rate", &EvalMetrics::advice_rate)
      .def_readonly("bayes_match", &EvalMetrics::bayes_match)
      .def_readonly("risk_minus", &EvalMetrics::risk_minus)
      .def_readonly("risk_plus", &EvalMetrics::risk_plus)
      .def_readonly("match_minus", &EvalMetrics::match_minus)
      .def_readonly("match_plus", &EvalMetrics::match_plus);

  py::class_<TrainedPolicy>(m, "TrainedPolicy")
      .def_property_readonly(
          "method", [](const TrainedPolicy& p) { return method_name(p.method); })
      .def_readonly("space", &TrainedPolicy::space)
      .def_readonly("params", &TrainedPolicy::params)
      .def_readonly("epoch_losses", &TrainedPolicy::epoch_losses)
      .def("scores",
           [](const TrainedPolicy& p, const std::vector<double>& x) {
             return p.scores(x);
           })
      .def("act", [](const TrainedPolicy& p, const std::vector<double>& x) {
        return p.act(x);
      });

  m.def(
      "train_policy",
      [](const std::string& method, const Dataset& data,
         const TrainConfig& config) {
        return train_policy(method_from_name(method), data, config);
      },
      py::arg("method"), py::arg("data"), py::arg("config"));
  m.def(
      "evaluate_policy",
      [](const TrainedPolicy& policy, const Dataset& test,
         const RegionSpec& spec) {
        const PolicyRunner runner(policy);
        return evaluate_policy(learned_policy(runner), test, spec);
      },
      py::arg("policy"), py::arg("test"), py::arg("spec"));
  m.def(
      "decode_composite",
      [](const std::vector<double>& scores, const ActionSpace& space) {
        return decode_composite(scores, space);
      },
      py::arg("scores"), py::arg("space"));
  m.def(
      "decode_separated",
      [](double router, double query_1, double query_2) {
        return decode_separated(SeparatedScores{router, query_1, query_2});
      },
      py::arg("router"), py::arg("query_1"), py::arg("query_2"));

  m.def("read_cost_tensor", &read_cost_tensor, py::arg("path"));
  m.def("tensor_to_dataset", &tensor_to_dataset, py::arg("tensor"),
        py::arg("lambda_"));
  py::class_<CostTensorFile>(m, "CostTensorFile")
      .def_readonly("space", &CostTensorFile::space)
      .def_readonly("num_instances", &CostTensorFile::num_instances)
      .def_readonly("feature_dim", &CostTensorFile::feature_dim);
  m.def("read_policy", &read_policy, py::arg("path"));
  m.def("write_policy", &write_policy, py::arg("path"), py::arg("policy"));
}
