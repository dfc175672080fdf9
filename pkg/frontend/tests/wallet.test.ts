// Cross-implementation vectors: the expected values in vectors.json were
// produced by the ledger node itself, so a matching signature here means
// the gateway will accept what the browser signs.

import { describe, expect, it } from "vitest";

import { bytesToHex, hexToBytes } from "../src/encoding.js";
import { buildPayload, signTx, txIdOf, ZERO_ADDRESS } from "../src/tx.js";
import { loadOrCreateWallet, walletFromSeed } from "../src/wallet.js";
import vectors from "./vectors.json";

const wallet = walletFromSeed(hexToBytes(vectors.wallet.seed));

describe("wallet", () => {
  it("derives the same public key and address as the node", () => {
    expect(bytesToHex(wallet.publicKey)).toBe(vectors.wallet.public_key);
    expect(wallet.address).toBe(vectors.wallet.address);
  });

  it("persists one seed in storage and reloads it", () => {
    const data: Record<string, string> = {};
    const storage = {
      getItem: (k: string) => data[k] ?? null,
      setItem: (k: string, v: string) => {
        data[k] = v;
      },
    };
    const first = loadOrCreateWallet(storage);
    const second = loadOrCreateWallet(storage);
    expect(second.address).toBe(first.address);
    expect(Object.keys(data)).toHaveLength(1);
  });
});

describe("transaction signing", () => {
  it("builds the exact payload bytes the node signs", () => {
    const payload = buildPayload(wallet.address, wallet.publicKey, {
      nonce: vectors.tx.nonce,
      target: vectors.tx.target,
      op: vectors.tx.op,
      args: vectors.tx.args,
    });
    expect(bytesToHex(payload)).toBe(vectors.tx.payload_hex);
  });

  it("produces a byte-identical signature and tx id", () => {
    const envelope = signTx(wallet, {
      nonce: vectors.tx.nonce,
      target: vectors.tx.target,
      op: vectors.tx.op,
      args: vectors.tx.args,
    });
    expect(envelope.sender).toBe(vectors.tx.sender);
    expect(envelope.public_key).toBe(vectors.tx.public_key);
    expect(envelope.signature).toBe(vectors.tx.signature);
    expect(txIdOf(envelope)).toBe(vectors.tx.tx_id);
  });

  it("signs deployments against the zero address", () => {
    expect(vectors.deploy_tx.target).toBe(ZERO_ADDRESS);
    const envelope = signTx(wallet, {
      nonce: vectors.deploy_tx.nonce,
      target: vectors.deploy_tx.target,
      op: vectors.deploy_tx.op,
      args: vectors.deploy_tx.args,
    });
    expect(envelope.signature).toBe(vectors.deploy_tx.signature);
    expect(txIdOf(envelope)).toBe(vectors.deploy_tx.tx_id);
  });
});
