// Signed transaction envelopes, byte-compatible with the gateway.

import { sha256 } from "@noble/hashes/sha2.js";

import {
  JsonValue,
  bytesToHex,
  canonicalJsonBytes,
  concatBytes,
  hexToBytes,
  lpBytes,
  lpStr,
  u64,
} from "./encoding.js";
import { Wallet, sign } from "./wallet.js";

export const ZERO_ADDRESS = "0x" + "0".repeat(40);

export interface TxFields {
  nonce: number;
  target: string; // 0x address; ZERO_ADDRESS deploys, op names the kind
  op: string;
  args: { [key: string]: JsonValue };
}

export interface TxEnvelope {
  sender: string;
  public_key: string;
  nonce: number;
  target: string;
  op: string;
  args: { [key: string]: JsonValue };
  signature: string;
}

export function addressBytes(address: string): Uint8Array {
  if (!/^0x[0-9a-f]{40}$/.test(address)) {
    throw new Error(`malformed address: ${address}`);
  }
  return hexToBytes(address.slice(2));
}

export function buildPayload(sender: string, publicKey: Uint8Array, fields: TxFields): Uint8Array {
  return concatBytes(
    addressBytes(sender),
    lpBytes(publicKey),
    u64(fields.nonce),
    addressBytes(fields.target),
    lpStr(fields.op),
    lpBytes(canonicalJsonBytes(fields.args)),
  );
}

export function signTx(wallet: Wallet, fields: TxFields): TxEnvelope {
  const payload = buildPayload(wallet.address, wallet.publicKey, fields);
  const signature = sign(wallet, payload);
  return {
    sender: wallet.address,
    public_key: bytesToHex(wallet.publicKey),
    nonce: fields.nonce,
    target: fields.target,
    op: fields.op,
    args: fields.args,
    signature: bytesToHex(signature),
  };
}

export function txIdOf(envelope: TxEnvelope): string {
  const payload = buildPayload(envelope.sender, hexToBytes(envelope.public_key), envelope);
  const wire = concatBytes(payload, lpBytes(hexToBytes(envelope.signature)));
  return bytesToHex(sha256(wire));
}
