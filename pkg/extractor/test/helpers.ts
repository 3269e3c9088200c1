import pngjs from 'pngjs'
import { writeFileSync } from 'fs'
import { mulberry32 } from '../src/rng.js'

const { PNG } = pngjs

/** Deterministic RGB noise PNG. */
export function writeTestPng(path: string, width: number, height: number, seed: number): void {
  const png = new PNG({ width, height })
  const rand = mulberry32(seed)
  for (let i = 0; i < width * height; i++) {
    png.data[4 * i] = Math.floor(rand() * 256)
    png.data[4 * i + 1] = Math.floor(rand() * 256)
    png.data[4 * i + 2] = Math.floor(rand() * 256)
    png.data[4 * i + 3] = 255
  }
  writeFileSync(path, PNG.sync.write(png))
}
