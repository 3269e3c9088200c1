/**
 * PNG decoding and the pinned input preprocessing.
 *
 * Preprocessing (fixed so extractions are reproducible): decode to RGB,
 * optionally center-crop to a square, bilinear-resize to the backbone
 * input size, scale to [0, 1], subtract 0.5. Images are assumed
 * pre-cropped to faces; the center-crop flag only guards against
 * non-square inputs.
 */

import * as tf from '@tensorflow/tfjs'
import { readFileSync } from 'fs'
import pngjs from 'pngjs'
import { INPUT_SIZE } from './backbone.js'

const { PNG } = pngjs

export function decodePng(path: string): { data: Uint8Array; width: number; height: number } {
  const buf = readFileSync(path)
  const png = PNG.sync.read(buf)
  return { data: png.data, width: png.width, height: png.height }
}

export function imageToInput(
  image: { data: Uint8Array; width: number; height: number },
  centerCrop: boolean,
): tf.Tensor4D {
  return tf.tidy(() => {
    const { data, width, height } = image
    const rgb = new Float32Array(width * height * 3)
    for (let i = 0; i < width * height; i++) {
      rgb[3 * i] = data[4 * i]
      rgb[3 * i + 1] = data[4 * i + 1]
      rgb[3 * i + 2] = data[4 * i + 2]
    }
    let t: tf.Tensor3D = tf.tensor3d(rgb, [height, width, 3])
    if (centerCrop && width !== height) {
      const side = Math.min(width, height)
      const top = Math.floor((height - side) / 2)
      const left = Math.floor((width - side) / 2)
      t = tf.slice3d(t, [top, left, 0], [side, side, 3])
    }
    const resized = tf.image.resizeBilinear(t, [INPUT_SIZE, INPUT_SIZE])
    return resized.div(255.0).sub(0.5).expandDims(0) as tf.Tensor4D
  })
}

export function loadImageInput(path: string, centerCrop: boolean): tf.Tensor4D {
  return imageToInput(decodePng(path), centerCrop)
}
