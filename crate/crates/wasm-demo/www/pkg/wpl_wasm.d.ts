/* tslint:disable */
/* eslint-disable */

/**
 * Geometry explorer: WPL parameters, area and an embedded profile for a
 * phase-covariant channel with contractions `(λ⊥, λ∥)`.
 */
export function explore_geometry(lambda_perp: number, lambda_par: number, convention: string): string;

/**
 * Four-probe tomography of a single-qubit channel, e.g.
 * `"amplitude_damping:0.2"`. `shots = 0` is exact mode (no bootstrap).
 */
export function run_tomography_demo(channel: string, shots: number, replicates: number, seed: bigint): string;

/**
 * VQE on the two-qubit instance with all three optimizers.
 * `shots = 0` is exact mode.
 */
export function run_vqe_demo(eta: number, iterations: number, shots: number, seed: bigint): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly explore_geometry: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly run_tomography_demo: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
    readonly run_vqe_demo: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
