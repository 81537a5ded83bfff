/* tslint:disable */
/* eslint-disable */

/**
 * JSON summary of a parameter: `mu`, `class` and, in the shift locus, its side.
 */
export function classify(rho_re: number, rho_im: number, re: number, im: number, max_iter: number): string;

/**
 * `I(λ)` as `[re, im]`.
 */
export function invert(rho_re: number, rho_im: number, re: number, im: number): Float64Array;

/**
 * Square z-plane image centered at the origin as RGBA bytes.
 */
export function render_dynamic(rho_re: number, rho_im: number, re: number, im: number, width: number, px: number, max_iter: number): Uint8Array;

/**
 * Square λ-plane image as RGBA bytes.
 */
export function render_parameter(rho_re: number, rho_im: number, center_re: number, center_im: number, width: number, px: number, max_iter: number): Uint8Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly classify: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly invert: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly render_dynamic: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly render_parameter: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
