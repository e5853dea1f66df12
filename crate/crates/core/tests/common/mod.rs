#![allow(dead_code)]

pub mod free_fermion;
pub mod random;
