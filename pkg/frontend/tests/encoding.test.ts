import { describe, expect, it } from "vitest";

import { bytesToHex, canonicalJson, canonicalJsonBytes, hexToBytes, lpStr, u32, u64 } from "../src/encoding.js";
import vectors from "./vectors.json";

describe("binary primitives", () => {
  it("encodes big-endian integers", () => {
    expect(bytesToHex(u32(1))).toBe("00000001");
    expect(bytesToHex(u64(2 ** 40))).toBe("0000010000000000");
  });

  it("rejects out-of-range values", () => {
    expect(() => u32(-1)).toThrow();
    expect(() => u64(2 ** 63)).toThrow(); // not a safe integer
  });

  it("length-prefixes UTF-8 strings", () => {
    expect(bytesToHex(lpStr("é"))).toBe("00000002c3a9");
  });

  it("hex round-trips", () => {
    expect(bytesToHex(hexToBytes("00ff10"))).toBe("00ff10");
    expect(() => hexToBytes("0g")).toThrow();
  });
});

describe("canonical JSON", () => {
  it("matches the server rendering byte for byte", () => {
    const bytes = canonicalJsonBytes(vectors.canonical_json.value);
    expect(bytesToHex(bytes)).toBe(vectors.canonical_json.bytes_hex);
  });

  it("sorts keys and stays compact", () => {
    expect(canonicalJson({ b: 1, a: [true, null] })).toBe('{"a":[true,null],"b":1}');
  });

  it("rejects unsafe integers", () => {
    expect(() => canonicalJson({ x: 2 ** 60 })).toThrow();
    expect(() => canonicalJson({ x: 1.5 })).toThrow();
  });
});
