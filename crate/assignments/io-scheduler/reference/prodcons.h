#ifndef PRODCONS_H
#define PRODCONS_H

#include <stdio.h>
#include <stdlib.h>
#include <unistd.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <sys/ipc.h>
#include <sys/shm.h>
#include <sys/sem.h>

#include "semaphore.h"

/* number of buffers in the circular queue */
#define SIZE 10

#define NUM_PRODUCERS 3
#define REQUESTS_PER_PRODUCER 5

/* semaphore indexes within the set */
#define SPACE_AVAILABLE 0
#define MESSAGE_AVAILABLE 1
#define MUTEX_P 2
#define MUTEX_C 3

typedef struct {
    int buffer[SIZE];
    int head;
    int tail;
    int shm_id;
} queue_requests;

queue_requests *initialization(int *sem_out);
void removal(queue_requests *q, int sem_id);

void insert_request(queue_requests *q, int sem_id, int value);
int pick_request(queue_requests *q, int sem_id);

void producer(queue_requests *q, int sem_id);
void consumer(queue_requests *q, int sem_id);

#endif
