/*
 * Copyright 2026 The fedreg Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cstdlib>

#include "fedreg/ahe.h"
#include "fedreg/crypto/rng.h"
#include "fedreg/error.h"
#include "fedreg/ring.h"
#include "test_support.h"

namespace fedreg {
namespace {

class AheTest : public ::testing::TestWithParam<AheBackend> {
 protected:
  const AheKeyPair& keys() { return testing::Keys(GetParam()); }
  const AhePublicKey& pk() { return *keys().pk; }
  const AheSecretKey& sk() { return *keys().sk; }
  mpz_class Top() { return (mpz_class(1) << 256) - 1; }
  Csprng rng_{21, "ahe/test"};
};

TEST_P(AheTest, Boundaries) {
  EXPECT_EQ(sk().Decrypt(pk().Encrypt(0, rng_)), 0);
  EXPECT_EQ(sk().Decrypt(pk().Encrypt(Top(), rng_)), Top());
  EXPECT_EQ(sk().Decrypt(pk().Encrypt(5, rng_)), 5);
  EXPECT_EQ(sk().Decrypt(pk().Encrypt(123456789, rng_)), 123456789);
}

TEST_P(AheTest, RejectsOutOfRangePlaintext) {
  try {
    pk().Encrypt(Top() + 1, rng_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRange);
  }
}

TEST_P(AheTest, FreshCoins) {
  const Ciphertext a = pk().Encrypt(5, rng_);
  const Ciphertext b = pk().Encrypt(5, rng_);
  EXPECT_NE(a.body, b.body);
  EXPECT_EQ(sk().Decrypt(a), sk().Decrypt(b));
}

TEST_P(AheTest, AdditionWrapsAround) {
  const Ciphertext c = pk().Add(pk().Encrypt(Top(), rng_), pk().Encrypt(1, rng_));
  EXPECT_EQ(sk().Decrypt(c), 0);
  EXPECT_EQ(sk().Decrypt(pk().Add(pk().Encrypt(5, rng_), pk().Encrypt(7, rng_))), 12);
  EXPECT_EQ(sk().Decrypt(pk().Add(pk().Encrypt(99, rng_), pk().Encrypt(0, rng_))), 99);
}

TEST_P(AheTest, ScalarMultiplication) {
  EXPECT_EQ(sk().Decrypt(pk().ScalarMul(pk().Encrypt(3, rng_), 4)), 12);
  EXPECT_EQ(sk().Decrypt(pk().ScalarMul(pk().Encrypt(77, rng_), 1)), 77);
  const mpz_class x = 123457;
  EXPECT_EQ(sk().Decrypt(pk().ScalarMul(pk().Encrypt(x, rng_), Top())),
            Top() + 1 - x);
}

TEST_P(AheTest, RandomOracle) {
  const Ring ring(256);
  for (int i = 0; i < 100; ++i) {
    const mpz_class a = ring.Random(rng_);
    const mpz_class b = ring.Random(rng_);
    EXPECT_EQ(sk().Decrypt(pk().ScalarMul(pk().Encrypt(a, rng_), b)), ring.Mul(a, b));
    EXPECT_EQ(sk().Decrypt(pk().Add(pk().Encrypt(a, rng_), pk().Encrypt(b, rng_))),
              ring.Add(a, b));
    EXPECT_EQ(sk().Decrypt(pk().EncryptAdd(pk().Encrypt(a, rng_), b, rng_)),
              ring.Add(a, b));
  }
}

TEST_P(AheTest, VectorAddition) {
  const Ring ring(256);
  HeEvaluator ev(pk(), rng_);
  RingVector x(10);
  RingVector y(10);
  for (size_t i = 0; i < 10; ++i) {
    x[i] = ring.Random(rng_);
    y[i] = ring.Random(rng_);
  }
  const auto ex = ev.Encrypt(x);
  const auto ey = ev.Encrypt(y);
  for (size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(ev.Decrypt(sk(), ev.Add(ex[i], ey[i])), ring.Add(x[i], y[i]));
  }
  EXPECT_EQ(ev.counts().enc, 20u);
  EXPECT_EQ(ev.counts().ct_mul, 10u);
  EXPECT_EQ(ev.counts().dec, 10u);
  EXPECT_EQ(ev.counts().const_mul, 0u);
}

TEST_P(AheTest, CiphertextLength) {
  const unsigned expect = GetParam() == AheBackend::kJoyeLibert ? 2048 : 4096;
  EXPECT_EQ(pk().ciphertext_bits(), expect);
  EXPECT_EQ(pk().SerializeCiphertext(pk().Encrypt(1, rng_)).size(), expect / 8);
  EXPECT_EQ(pk().Encrypt(1, rng_).bits, expect);
}

TEST_P(AheTest, KeySerialization) {
  const Bytes blob = SerializeKeyPair(keys());
  const AheKeyPair back = DeserializeKeyPair(blob);
  ASSERT_TRUE(back.sk);
  EXPECT_EQ(back.pk->key_id(), pk().key_id());
  EXPECT_EQ(back.sk->Decrypt(pk().Encrypt(42, rng_)), 42);
  const auto pub = DeserializePublicKey(SerializePublicKey(pk()));
  EXPECT_EQ(sk().Decrypt(pub->Encrypt(43, rng_)), 43);
  EXPECT_FALSE(DeserializeKeyPair(SerializePublicKey(pk())).sk);
  Bytes bad = blob;
  bad[0] = 'X';
  EXPECT_THROW(DeserializeKeyPair(bad), Error);
  EXPECT_THROW(DeserializeKeyPair(Bytes(blob.begin(), blob.begin() + 20)), Error);
}

TEST_P(AheTest, PackRoundTrip) {
  std::vector<Ciphertext> cts;
  for (int i = 0; i < 4; ++i) cts.push_back(pk().Encrypt(i, rng_));
  const Bytes packed = PackCiphertexts(pk(), cts);
  EXPECT_EQ(packed.size(), 4 * pk().ciphertext_bytes());
  const auto back = UnpackCiphertexts(pk(), packed);
  ASSERT_EQ(back.size(), 4u);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(back[i].body, cts[i].body);
  EXPECT_THROW(UnpackCiphertexts(pk(), Bytes(packed.begin(), packed.end() - 1)),
               Error);
}

INSTANTIATE_TEST_SUITE_P(Backends, AheTest,
                         ::testing::Values(AheBackend::kJoyeLibert,
                                           AheBackend::kPaillier),
                         [](const auto& info) {
                           return std::string(info.param == AheBackend::kPaillier
                                                  ? "Paillier"
                                                  : "JoyeLibert");
                         });

TEST(AheKeygen, DefaultModulusExamples) {
  Csprng rng(22, "ahe/3072");
  const AheKeyPair kp = AheKeygen(AheBackend::kJoyeLibert, 3072, 256, 101);
  EXPECT_EQ(kp.pk->ciphertext_bits(), 3072u);
  EXPECT_EQ(kp.sk->Decrypt(kp.pk->Encrypt(0, rng)), 0);
  const mpz_class top = (mpz_class(1) << 256) - 1;
  EXPECT_EQ(kp.sk->Decrypt(kp.pk->Encrypt(top, rng)), top);
}

TEST(AheKeygen, SeedsDetermineKeys) {
  const AheKeyPair a = AheKeygen(AheBackend::kJoyeLibert, 2048, 64, 1);
  const AheKeyPair b = AheKeygen(AheBackend::kJoyeLibert, 2048, 64, 1);
  const AheKeyPair c = AheKeygen(AheBackend::kJoyeLibert, 2048, 64, 2);
  EXPECT_EQ(a.pk->ciphertext_modulus(), b.pk->ciphertext_modulus());
  EXPECT_NE(a.pk->ciphertext_modulus(), c.pk->ciphertext_modulus());
}

TEST(AheKeygen, RejectsBadParameters) {
  EXPECT_THROW(AheKeygen(AheBackend::kJoyeLibert, 1024, 256, 1), Error);
  EXPECT_THROW(AheKeygen(AheBackend::kJoyeLibert, 2048, 1000, 1), Error);
}

TEST(AheKeygen, SmallMessageSpace) {
  Csprng rng(23, "ahe/k16");
  for (AheBackend b : {AheBackend::kJoyeLibert, AheBackend::kPaillier}) {
    const AheKeyPair kp = AheKeygen(b, 2048, 16, 3);
    const Ciphertext c = kp.pk->ScalarMul(kp.pk->Encrypt(300, rng), 300);
    EXPECT_EQ(kp.sk->Decrypt(c), (300 * 300) % 65536);
  }
}

TEST(AheKeys, MismatchDetected) {
  Csprng rng(24, "ahe/mismatch");
  const auto& jl = testing::Keys(AheBackend::kJoyeLibert);
  const AheKeyPair other = AheKeygen(AheBackend::kJoyeLibert, 2048, 256, 99);
  const Ciphertext foreign = other.pk->Encrypt(1, rng);
  try {
    jl.pk->Add(jl.pk->Encrypt(1, rng), foreign);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kKeyMismatch);
  }
  EXPECT_THROW(jl.sk->Decrypt(foreign), Error);
}

TEST(AheBackendNames, ParseAndEnv) {
  EXPECT_EQ(ParseAheBackend("jl"), AheBackend::kJoyeLibert);
  EXPECT_EQ(ParseAheBackend("joye-libert"), AheBackend::kJoyeLibert);
  EXPECT_EQ(ParseAheBackend("paillier"), AheBackend::kPaillier);
  EXPECT_THROW(ParseAheBackend("rsa"), Error);
  setenv("FEDREG_AHE_BACKEND", "paillier", 1);
  EXPECT_EQ(AheBackendFromEnv(), AheBackend::kPaillier);
  unsetenv("FEDREG_AHE_BACKEND");
  EXPECT_EQ(AheBackendFromEnv(), AheBackend::kJoyeLibert);
}

}  // namespace
}  // namespace fedreg
