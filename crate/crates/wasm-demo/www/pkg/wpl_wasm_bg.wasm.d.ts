/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const explore_geometry: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const run_tomography_demo: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
export const run_vqe_demo: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
