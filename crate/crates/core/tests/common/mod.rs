#![allow(dead_code)]

pub mod bbob_reference;
pub mod gradcheck;
