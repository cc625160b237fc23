#include <doctest.h>

#include <memory>
#include <sstream>

#include "nndbench/decoders.hpp"
#include "nndbench/errors.hpp"
#include "nndbench/gradcheck.hpp"
#include "nndbench/loss.hpp"
#include "nndbench/network.hpp"

using namespace nndbench;

namespace {

Tensor<double> random_tensor(std::vector<std::int64_t> shape, RngStream& rng, double scale = 1.0) {
  Tensor<double> t(std::move(shape));
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = scale * rng.normal();
  return t;
}

Tensor<double> random_bits(std::vector<std::int64_t> shape, RngStream& rng) {
  Tensor<double> t(std::move(shape));
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(rng.below(2));
  return t;
}

void zero_all_params(Network<float>& net) {
  for (Param<float>* p : net.params()) p->value.set_zero();
}

}  // namespace

TEST_SUITE("neuralnet") {

TEST_CASE("mse loss reference values") {
  Tensor<float> x({1, 4});
  Tensor<float> x_hat({1, 4});
  SUBCASE("perfect prediction") {
    for (int i = 0; i < 4; ++i) x[i] = x_hat[i] = static_cast<float>(i % 2);
    CHECK(mse_loss(x, x_hat) == 0.0);
  }
  SUBCASE("maximal single-bit error") {
    Tensor<float> a({1, 1});
    Tensor<float> b({1, 1});
    a[0] = 1.0f;
    b[0] = 0.0f;
    CHECK(mse_loss(a, b) == 1.0);
  }
  SUBCASE("uniform half guesses") {
    x[0] = 1; x[1] = 0; x[2] = 1; x[3] = 0;
    for (int i = 0; i < 4; ++i) x_hat[i] = 0.5f;
    CHECK(mse_loss(x, x_hat) == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("shape mismatch throws") {
    Tensor<float> bad({1, 3});
    CHECK_THROWS_AS(mse_loss(x, bad), ArgumentError);
  }
}

TEST_CASE("zero residual gives a zero output gradient") {
  RngStream rng(1);
  Tensor<float> x({2, 4});
  for (std::int64_t i = 0; i < x.size(); ++i) x[i] = static_cast<float>(rng.below(2));
  const Tensor<float> g = mse_loss_grad(x, x);
  for (std::int64_t i = 0; i < g.size(); ++i) CHECK(g[i] == 0.0f);
}

TEST_CASE("all-zero parameters put every output at one half") {
  RngStream rng(4);
  for (ArchKind kind : {ArchKind::kMlp, ArchKind::kCnn, ArchKind::kRnn}) {
    ArchitectureSpec spec;
    spec.kind = kind;
    spec.n = 8;
    spec.k = 4;
    spec.rnn_hidden = 16;
    RngStream init(9);
    Network<float> net = build_network<float>(spec, init);
    zero_all_params(net);
    Tensor<float> input({3, 8});
    for (std::int64_t i = 0; i < input.size(); ++i) input[i] = static_cast<float>(rng.normal());
    const Tensor<float> out = net.forward(input, Mode::kInfer);
    for (std::int64_t i = 0; i < out.size(); ++i) CHECK(out[i] == 0.5f);
  }
}

TEST_CASE("inference is deterministic") {
  ArchitectureSpec spec;
  spec.n = 8;
  spec.k = 4;
  RngStream init(12);
  Network<float> net = build_network<float>(spec, init);
  Tensor<float> input({2, 8});
  RngStream rng(13);
  for (std::int64_t i = 0; i < input.size(); ++i) input[i] = static_cast<float>(rng.normal());
  const Tensor<float> a = net.forward(input, Mode::kInfer);
  const Tensor<float> b = net.forward(input, Mode::kInfer);
  for (std::int64_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("dense cancellation gives sigmoid(0)") {
  Network<float> net;
  net.add(std::make_unique<Dense<float>>(2, 1));
  net.add(std::make_unique<Sigmoid<float>>());
  RngStream init(1);
  net.init_params(init);
  auto params = net.params();
  params[0]->value[0] = 1.0f;
  params[0]->value[1] = 1.0f;
  params[1]->value[0] = 0.0f;
  Tensor<float> input({1, 2});
  input[0] = 2.0f;
  input[1] = -2.0f;
  CHECK(net.forward(input, Mode::kInfer)[0] == 0.5f);
}

TEST_CASE("sigmoid output stays strictly inside (0,1)") {
  Network<float> net;
  net.add(std::make_unique<Sigmoid<float>>());
  Tensor<float> input({1, 4});
  input[0] = -1000.0f;
  input[1] = 1000.0f;
  input[2] = -40.0f;
  input[3] = 40.0f;
  const Tensor<float> out = net.forward(input, Mode::kInfer);
  for (std::int64_t i = 0; i < out.size(); ++i) {
    CHECK(out[i] > 0.0f);
    CHECK(out[i] < 1.0f);
  }
}

TEST_CASE("xavier bounds and determinism") {
  RngStream rng(21);
  Tensor<float> w({64, 32});
  xavier_fill(w, 64, 32, rng);
  const double bound = std::sqrt(6.0 / 96.0);
  CHECK(bound == doctest::Approx(0.25).epsilon(1e-15));
  for (std::int64_t i = 0; i < w.size(); ++i) {
    CHECK(w[i] <= bound);
    CHECK(w[i] >= -bound);
  }
  RngStream rng2(21);
  Tensor<float> w2({64, 32});
  xavier_fill(w2, 64, 32, rng2);
  for (std::int64_t i = 0; i < w.size(); ++i) CHECK(w[i] == w2[i]);
}

TEST_CASE("adam step with zero gradients leaves parameters in place") {
  ArchitectureSpec spec;
  spec.n = 8;
  spec.k = 4;
  RngStream init(33);
  Network<float> net = build_network<float>(spec, init);
  std::vector<float> before;
  for (Param<float>* p : net.params()) {
    for (std::int64_t i = 0; i < p->value.size(); ++i) before.push_back(p->value[i]);
  }
  net.zero_grads();
  net.adam_step(AdamConfig{});
  std::size_t idx = 0;
  for (Param<float>* p : net.params()) {
    for (std::int64_t i = 0; i < p->value.size(); ++i) CHECK(p->value[i] == before[idx++]);
  }
  CHECK(net.adam_steps() == 1);
}

TEST_CASE("dropout preserves expectation in train mode") {
  Network<float> net;
  net.add(std::make_unique<Dropout<float>>(0.1));
  net.set_dropout_stream(RngStream(77));
  Tensor<float> input({1, 100});
  for (std::int64_t i = 0; i < input.size(); ++i) input[i] = 1.0f;

  double sum = 0.0;
  constexpr int kPasses = 100'000;
  constexpr int kProbe = 100;
  for (int pass = 0; pass < kPasses / kProbe; ++pass) {
    const Tensor<float> out = net.forward(input, Mode::kTrain);
    for (std::int64_t i = 0; i < out.size(); ++i) sum += out[i];
  }
  const double mean = sum / ((kPasses / kProbe) * kProbe);
  CHECK(mean == doctest::Approx(1.0).epsilon(0.02));

  // inference is the identity
  const Tensor<float> out = net.forward(input, Mode::kInfer);
  for (std::int64_t i = 0; i < out.size(); ++i) CHECK(out[i] == 1.0f);
}

TEST_CASE("gradient check: dense alone") {
  RngStream init(101), data(102);
  Network<double> net;
  net.add(std::make_unique<Dense<double>>(6, 5));
  net.init_params(init);
  const auto input = random_tensor({3, 6}, data);
  const auto target = random_tensor({3, 5}, data, 0.5);
  CHECK(gradient_check(net, input, target).max_rel_error < 1e-4);
}

TEST_CASE("gradient check: dense + sigmoid toy net") {
  RngStream init(103), data(104);
  Network<double> net;
  net.add(std::make_unique<Dense<double>>(5, 4));
  net.add(std::make_unique<Sigmoid<double>>());
  net.init_params(init);
  const auto input = random_tensor({2, 5}, data);
  const auto target = random_bits({2, 4}, data);
  CHECK(gradient_check(net, input, target).max_rel_error < 1e-4);
}

TEST_CASE("gradient check: conv alone") {
  RngStream init(105), data(106);
  Network<double> net;
  net.add(std::make_unique<Conv1D<double>>(3, 2, 3, Conv1D<double>::Padding::kSame));
  net.add(std::make_unique<Flatten<double>>());
  net.init_params(init);
  const auto input = random_tensor({2, 8, 2}, data);
  const auto target = random_tensor({2, 24}, data, 0.5);
  CHECK(gradient_check(net, input, target).max_rel_error < 1e-4);
}

TEST_CASE("gradient check: conv + pool toy net") {
  RngStream init(107), data(108);
  Network<double> net;
  net.add(std::make_unique<Conv1D<double>>(3, 1, 2, Conv1D<double>::Padding::kSame));
  net.add(std::make_unique<MaxPool1D<double>>());
  net.add(std::make_unique<Flatten<double>>());
  net.add(std::make_unique<Sigmoid<double>>());
  net.init_params(init);
  const auto input = random_tensor({2, 8, 1}, data);
  const auto target = random_bits({2, 8}, data);
  CHECK(gradient_check(net, input, target).max_rel_error < 1e-4);
}

TEST_CASE("gradient check: valid-padding conv") {
  RngStream init(109), data(110);
  Network<double> net;
  net.add(std::make_unique<Conv1D<double>>(4, 3, 2, Conv1D<double>::Padding::kValid));
  net.add(std::make_unique<Flatten<double>>());
  net.init_params(init);
  const auto input = random_tensor({2, 4, 3}, data);
  const auto target = random_tensor({2, 2}, data, 0.5);
  CHECK(gradient_check(net, input, target).max_rel_error < 1e-4);
}

TEST_CASE("gradient check: single LSTM cell over 4 time steps") {
  RngStream init(111), data(112);
  Network<double> net;
  net.add(std::make_unique<Lstm<double>>(1, 6));
  net.init_params(init);
  const auto input = random_tensor({3, 4, 1}, data);
  const auto target = random_tensor({3, 6}, data, 0.5);
  CHECK(gradient_check(net, input, target).max_rel_error < 1e-4);
}

TEST_CASE("gradient check: lstm + readout") {
  RngStream init(113), data(114);
  Network<double> net;
  net.add(std::make_unique<Reshape<double>>(std::vector<std::int64_t>{5, 1}));
  net.add(std::make_unique<Lstm<double>>(1, 4));
  net.add(std::make_unique<Dense<double>>(4, 3));
  net.add(std::make_unique<Sigmoid<double>>());
  net.init_params(init);
  const auto input = random_tensor({2, 5}, data);
  const auto target = random_bits({2, 3}, data);
  CHECK(gradient_check(net, input, target).max_rel_error < 1e-4);
}

TEST_CASE("gradient check: full architectures at N=8") {
  RngStream data(115);
  const auto input = random_tensor({2, 8}, data);
  const auto target = random_bits({2, 4}, data);
  for (ArchKind kind : {ArchKind::kMlp, ArchKind::kCnn, ArchKind::kRnn}) {
    ArchitectureSpec spec;
    spec.kind = kind;
    spec.n = 8;
    spec.k = 4;
    spec.rnn_hidden = 16;  // keeps the parameter sweep fast; same layer code
    RngStream init(116);
    Network<double> net = build_network<double>(spec, init);
    CAPTURE(to_string(kind));
    CHECK(gradient_check(net, input, target).max_rel_error < 1e-4);
  }
}

TEST_CASE("gradient check validates its step size") {
  RngStream init(117), data(118);
  Network<double> net;
  net.add(std::make_unique<Dense<double>>(2, 2));
  net.init_params(init);
  const auto input = random_tensor({1, 2}, data);
  const auto target = random_tensor({1, 2}, data);
  CHECK_THROWS_AS(gradient_check(net, input, target, 1e-8), ArgumentError);
  CHECK_THROWS_AS(gradient_check(net, input, target, 1e-2), ArgumentError);
}

TEST_CASE("model serialization round-trips bit-exactly") {
  ArchitectureSpec spec;
  spec.kind = ArchKind::kCnn;
  spec.n = 16;
  spec.k = 8;
  RngStream init(200);
  NetworkModel model = build(spec, init);
  model.trained_p = 0.6;
  model.rho_t_db = 4.0;
  model.trained_steps = 1234;

  std::stringstream buf;
  model.save(buf);
  NetworkModel loaded = NetworkModel::load(buf);

  CHECK(loaded.spec.n == 16);
  CHECK(loaded.trained_p == 0.6);
  CHECK(loaded.rho_t_db == 4.0);
  CHECK(loaded.trained_steps == 1234);

  auto a = model.net.params();
  auto b = loaded.net.params();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i]->value.size() == b[i]->value.size());
    for (std::int64_t j = 0; j < a[i]->value.size(); ++j) {
      CHECK(a[i]->value[j] == b[i]->value[j]);
    }
  }

  RngStream data(201);
  Tensor<float> input({2, 16});
  for (std::int64_t i = 0; i < input.size(); ++i) input[i] = static_cast<float>(data.normal());
  const Tensor<float> out_a = model.net.forward(input, Mode::kInfer);
  const Tensor<float> out_b = loaded.net.forward(input, Mode::kInfer);
  for (std::int64_t i = 0; i < out_a.size(); ++i) CHECK(out_a[i] == out_b[i]);
}

}  // TEST_SUITE
