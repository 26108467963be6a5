/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const counterexample_stage: (a: number, b: number, c: number) => [number, number];
export const dyadic_stages: (a: number, b: number) => [number, number];
export const replicate_claim: (a: number, b: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
