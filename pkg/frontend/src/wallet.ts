// Built-in dev wallet: an Ed25519 seed kept in browser storage. The secret
// never leaves the client; every mutating request is signed locally.

import * as ed from "@noble/ed25519";
import { sha256, sha512 } from "@noble/hashes/sha2.js";

import { bytesToHex, hexToBytes, concatBytes } from "./encoding.js";

ed.hashes.sha512 = sha512;

const ACCOUNT_TAG = new TextEncoder().encode("ledgercal/addr/account");
const STORAGE_KEY = "ledgercal.wallet.seed";

export interface Wallet {
  seed: Uint8Array;
  publicKey: Uint8Array;
  address: string;
}

export function addressFromPublicKey(publicKey: Uint8Array): string {
  const digest = sha256(concatBytes(ACCOUNT_TAG, publicKey));
  return "0x" + bytesToHex(digest.slice(-20));
}

export function walletFromSeed(seed: Uint8Array): Wallet {
  if (seed.length !== 32) {
    throw new Error("wallet seed must be 32 bytes");
  }
  const publicKey = ed.getPublicKey(seed);
  return { seed, publicKey, address: addressFromPublicKey(publicKey) };
}

export function generateWallet(): Wallet {
  const seed = new Uint8Array(32);
  crypto.getRandomValues(seed);
  return walletFromSeed(seed);
}

export function sign(wallet: Wallet, payload: Uint8Array): Uint8Array {
  return ed.sign(payload, wallet.seed);
}

export interface SeedStorage {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

/** Load the wallet from storage, creating and persisting one if absent. */
export function loadOrCreateWallet(storage: SeedStorage): Wallet {
  const existing = storage.getItem(STORAGE_KEY);
  if (existing) {
    return walletFromSeed(hexToBytes(existing));
  }
  const wallet = generateWallet();
  storage.setItem(STORAGE_KEY, bytesToHex(wallet.seed));
  return wallet;
}
